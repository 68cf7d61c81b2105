#include <cstring>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wdm/checkpoint.hpp"
#include "wdm/error.hpp"

namespace wdm {
namespace {

Checkpoint make_checkpoint(bool variant) {
  Checkpoint c;
  c.net = NetConfig{4, 16, variant};
  TinyConvNet<float> net(c.net);
  RngState init(3, 1);
  net.init(init);
  c.parameters.assign(net.params().begin(), net.params().end());
  c.optimizer = AdamState(AdamConfig{2.5e-4}, c.parameters.size());
  RngState r(9);
  r.fill_normal(c.optimizer.m);
  r.fill_normal(c.optimizer.v);
  for (float& v : c.optimizer.v) v = v * v;
  c.optimizer.step = 123;
  c.step = 123;
  c.rng = RngState(77, 0, 4567);
  c.schedule = ScheduleSpec{100, 1e-4, 0.02};
  c.volume_dims = Dims3{16, 8, 16};
  return c;
}

bool bits_equal(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

TEST(Checkpoint, RoundtripIsBitExact) {
  for (bool variant : {false, true}) {
    const auto c = make_checkpoint(variant);
    const auto path = test::scratch_dir() / "model";
    save_checkpoint(c, path);
    const auto back = load_checkpoint(checkpoint_paths(path).manifest);
    EXPECT_EQ(back.net, c.net);
    EXPECT_TRUE(bits_equal(back.parameters, c.parameters));
    EXPECT_TRUE(bits_equal(back.optimizer.m, c.optimizer.m));
    EXPECT_TRUE(bits_equal(back.optimizer.v, c.optimizer.v));
    EXPECT_EQ(back.optimizer.config, c.optimizer.config);
    EXPECT_EQ(back.optimizer.step, c.optimizer.step);
    EXPECT_EQ(back.step, c.step);
    EXPECT_EQ(back.rng.seed(), c.rng.seed());
    EXPECT_EQ(back.rng.stream(), c.rng.stream());
    EXPECT_EQ(back.rng.counter(), c.rng.counter());
    EXPECT_EQ(back.schedule, c.schedule);
    EXPECT_EQ(back.volume_dims, c.volume_dims);
  }
}

TEST(Checkpoint, NetworkFromRestoresParameters) {
  const auto c = make_checkpoint(true);
  const auto net = network_from(c);
  EXPECT_EQ(net.config(), c.net);
  ASSERT_EQ(net.parameter_count(), c.parameters.size());
  EXPECT_TRUE(std::equal(c.parameters.begin(), c.parameters.end(), net.params().begin()));
}

TEST(Checkpoint, ParameterCountMismatchIsRejected) {
  auto c = make_checkpoint(false);
  c.parameters.pop_back();
  EXPECT_THROW(network_from(c), InvalidArgument);
}

TEST(Checkpoint, MissingFilesAreIoErrors) {
  EXPECT_THROW(load_checkpoint(test::scratch_dir() / "absent"), IoError);
  const auto c = make_checkpoint(false);
  const auto path = test::scratch_dir() / "model";
  save_checkpoint(c, path);
  std::filesystem::remove(checkpoint_paths(path).parameters);
  EXPECT_THROW(load_checkpoint(path), IoError);
}

}  // namespace
}  // namespace wdm
