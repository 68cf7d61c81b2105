#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wdm/error.hpp"
#include "wdm/volume.hpp"

namespace wdm::cli {

using Json = nlohmann::ordered_json;

/// Bad flags, names, or combinations; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A failed check (non-finite output, reconstruction error, divergence);
/// maps to exit code 1 after the command has written its diagnostics.
class CheckFailed : public Error {
 public:
  using Error::Error;
};

/// Ties CLI options to fields so a JSON config can fill the ones not given
/// on the command line, and so the resolved values can be echoed back.
class OptionBinder {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& key, T& field, const std::string& help) {
    CLI::Option* opt = nullptr;
    if constexpr (std::is_same_v<T, bool>) {
      opt = app->add_flag("--" + key, field, help);
    } else {
      opt = app->add_option("--" + key, field, help)->capture_default_str();
    }
    bindings_.push_back({key, opt, [&field](const Json& j) { field = j.get<T>(); },
                         [&field] { return Json(field); }});
    return opt;
  }

  bool has(std::string_view key) const;
  /// Fills fields whose option was not given; returns keys it did not know.
  std::vector<std::string> apply(const Json& config);
  void dump_into(Json& out) const;

 private:
  struct Binding {
    std::string key;
    CLI::Option* option;
    std::function<void(const Json&)> set;
    std::function<Json()> get;
  };
  std::vector<Binding> bindings_;
};

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string config;
  std::string output_dir;
  unsigned threads = 1;
};

struct Context {
  GlobalOptions global;
  std::ostream& out;
  std::ostream& err;
};

/// "16" -> 16x16x16; "DxHxW" otherwise.
Dims3 parse_dims(const std::string& text);

Json dims_json(const Dims3& dims);

std::filesystem::path require_output_dir(const Context& ctx);

void write_json(const std::filesystem::path& path, const Json& value);
Json read_json(const std::filesystem::path& path);

}  // namespace wdm::cli
