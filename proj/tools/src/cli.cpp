#include "cli.hpp"

#include <algorithm>
#include <exception>
#include <functional>
#include <map>

#include "commands.hpp"
#include "options.hpp"

namespace wdm::cli {

namespace {

struct Subcommand {
  CLI::App* app = nullptr;
  OptionBinder binder;
  std::function<int(const Context&, const Json&)> run;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wavelet diffusion for 3D volumes: preprocessing, training, sampling, evaluation."};
  app.name("wdm");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  OptionBinder global_binder;
  global_binder.add(&app, "seed", global.seed, "Seed for every random draw; printed by every command");
  app.add_option("--config", global.config,
                 "JSON file of option values (keys are long option names); flags override it");
  global_binder.add(&app, "output-dir", global.output_dir, "Directory for outputs");
  global_binder.add(&app, "threads", global.threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  SynthOptions synth;
  PreprocessOptions preprocess;
  RoundtripOptions roundtrip;
  TrainOptions train;
  SampleOptions sample;
  EvalOptions eval;
  BenchOptions bench;

  std::map<std::string, Subcommand> subs;
  auto add = [&](const std::string& name, const std::string& help) -> Subcommand& {
    Subcommand& s = subs[name];
    s.app = app.add_subcommand(name, help);
    return s;
  };
  {
    auto& s = add("synth", "Write seed-controlled synthetic ellipsoid volumes");
    add_synth(*s.app, s.binder, synth);
    s.run = [&](const Context& c, const Json& r) { return cmd_synth(synth, c, r); };
  }
  {
    auto& s = add("preprocess", "Apply a preprocessing recipe to every volume in a directory");
    add_preprocess(*s.app, s.binder, preprocess);
    s.run = [&](const Context& c, const Json& r) { return cmd_preprocess(preprocess, c, r); };
  }
  {
    auto& s = add("roundtrip-check", "Check DWT/IDWT perfect reconstruction on one volume");
    add_roundtrip(*s.app, s.binder, roundtrip);
    s.run = [&](const Context& c, const Json& r) { return cmd_roundtrip(roundtrip, c, r); };
  }
  {
    auto& s = add("train",
                  "Train the wavelet-domain denoiser. Checkpoints every --checkpoint-every steps; "
                  "keeps the last --keep-last plus the best 'window' loss");
    add_train(*s.app, s.binder, train);
    s.run = [&](const Context& c, const Json& r) { return cmd_train(train, c, r); };
  }
  {
    auto& s = add("sample", "Generate volumes from a checkpoint or the analytic Gaussian denoiser");
    add_sample(*s.app, s.binder, sample);
    s.run = [&](const Context& c, const Json& r) { return cmd_sample(sample, c, r); };
  }
  {
    auto& s = add("eval", "Diversity (MS-SSIM) or Frechet distance");
    add_eval(*s.app, s.binder, eval);
    s.run = [&](const Context& c, const Json& r) { return cmd_eval(eval, c, r); };
  }
  {
    auto& s = add("bench", "Time dwt3, idwt3 and avg_pool2");
    add_bench(*s.app, s.binder, bench);
    s.run = [&](const Context& c, const Json& r) { return cmd_bench(bench, c, r); };
  }
  {
    auto& s = add("presets", "Print the named presets");
    s.run = [&](const Context& c, const Json&) { return cmd_presets(c); };
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Context ctx{global, out, err};
  try {
    auto active = app.get_subcommands();
    Subcommand& sub = subs.at(active.front()->get_name());
    if (!global.config.empty()) {
      Json config = read_json(global.config);
      if (!config.is_object()) throw UsageError("config file must hold a JSON object");
      if (config.contains("command")) {
        if (config["command"] != sub.app->get_name()) {
          throw UsageError("config is for '" + config["command"].get<std::string>() + "', not '" +
                           sub.app->get_name() + "'");
        }
        config.erase("command");
      }
      const auto unknown_sub = sub.binder.apply(config);
      Json rest = Json::object();
      for (const auto& k : unknown_sub) rest[k] = config[k];
      const auto unknown = global_binder.apply(rest);
      if (!unknown.empty()) throw UsageError("unknown config key '" + unknown.front() + "'");
      ctx.global = global;
    }
    Json resolved = Json::object();
    resolved["command"] = sub.app->get_name();
    global_binder.dump_into(resolved);
    sub.binder.dump_into(resolved);
    return sub.run(ctx, resolved);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

}  // namespace wdm::cli
