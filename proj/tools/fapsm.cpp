// fapsm: command-line front end for the patch-based 1-to-N matcher.
//
// Settings come from a "key = value" file (--config, or $FAPSM_CONFIG) and are
// overridden by flags of the same name. Exit codes: 0 ok, 1 validation error,
// 2 I/O error, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fapsm/errors.hpp"
#include "fapsm/evaluation.hpp"
#include "fapsm/format.hpp"
#include "fapsm/io.hpp"
#include "fapsm/pipeline.hpp"
#include "fapsm/synth.hpp"

namespace {

using fapsm::Errc;
using fapsm::Error;

const std::vector<std::string> kSynthKeys = {"identities",     "probes_per_identity", "b", "m", "noise_sigma",
                                             "occlusion_prob", "corruption_probs",    "seed"};
const std::vector<std::string> kPipelineKeys = {"mode", "lambda1", "lambda2", "threshold",
                                                "kernel", "sigma", "nk", "seed"};

class Settings {
 public:
  void load_file(const std::filesystem::path& path) {
    for (auto& [key, entry] : fapsm::io::load_key_values(path)) {
      values_[key] = entry.value;
      origin_[key] = path.string() + ":" + std::to_string(entry.line);
    }
  }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
    origin_[key] = "--" + key;
  }

  bool has(const std::string& key) const { return values_.contains(key); }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(Errc::invalid_argument, "missing required setting '" + key + "'");
    return it->second;
  }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    auto v = fapsm::parse_double(text(key));
    if (!v) bad(key, "a number");
    return *v;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    auto v = fapsm::parse_int(text(key));
    if (!v) bad(key, "an integer");
    return *v;
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    std::stringstream ss(text(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto v = fapsm::parse_double(item);
      if (!v) bad(key, "a comma-separated list of numbers");
      out.push_back(*v);
    }
    return out;
  }

 private:
  [[noreturn]] void bad(const std::string& key, const std::string& what) const {
    throw Error(Errc::invalid_argument,
                "setting '" + key + "' (" + origin_.at(key) + ") must be " + what + ", got '" + values_.at(key) + "'");
  }

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> origin_;
};

fapsm::SynthConfig synth_config(const Settings& s) {
  fapsm::SynthConfig c;
  c.identities = s.integer("identities", c.identities);
  c.probes_per_identity = s.integer("probes_per_identity", c.probes_per_identity);
  c.feature_dim = s.integer("b", c.feature_dim);
  c.patch_count = s.integer("m", c.patch_count);
  c.noise_sigma = s.real("noise_sigma", c.noise_sigma);
  c.occlusion_prob = s.real("occlusion_prob", c.occlusion_prob);
  c.corruption_probs = s.reals("corruption_probs");
  const auto seed = s.integer("seed", 1);
  if (seed < 0) throw Error(Errc::invalid_argument, "seed must be non-negative");
  c.seed = std::uint64_t(seed);
  c.validate();
  return c;
}

fapsm::PipelineConfig pipeline_config(const Settings& s) {
  fapsm::PipelineConfig c;
  if (s.has("mode")) {
    const auto mode = s.text("mode");
    if (mode == "kernel") c.mode = fapsm::AssociativeMode::kernel;
    else if (mode == "linear") c.mode = fapsm::AssociativeMode::linear;
    else throw Error(Errc::invalid_argument, "mode must be 'kernel' or 'linear'");
  }
  if (s.has("kernel")) {
    const auto kind = s.text("kernel");
    if (kind == "gaussian") c.kernel.kind = fapsm::KernelKind::gaussian;
    else if (kind == "linear") c.kernel.kind = fapsm::KernelKind::linear;
    else throw Error(Errc::invalid_argument, "kernel must be 'gaussian' or 'linear'");
  }
  c.lambda1 = s.real("lambda1", c.lambda1);
  c.lambda2 = s.real("lambda2", c.lambda2);
  c.threshold = s.real("threshold", c.threshold);
  c.kernel.sigma = s.real("sigma", c.kernel.sigma);
  c.sample_count = s.integer("nk", 0);
  const auto seed = s.integer("seed", 1);
  if (seed < 0) throw Error(Errc::invalid_argument, "seed must be non-negative");
  c.seed = std::uint64_t(seed);
  c.validate();
  return c;
}

std::string serialize(const auto& value, auto writer) {
  std::ostringstream os;
  writer(os, value);
  return os.str();
}

void emit(const Settings& s, const std::string& report) {
  std::cout << report;
  if (s.has("output")) fapsm::io::save_text(s.text("output"), report);
}

int cmd_generate(const Settings& s) {
  const auto config = synth_config(s);
  const auto gallery_path = s.text("gallery");
  const auto probes_path = s.text("probes");
  auto data = fapsm::generate(config);
  fapsm::io::save_text(gallery_path, serialize(data.gallery, fapsm::io::write_gallery));
  fapsm::io::save_text(probes_path, serialize(data.probes, fapsm::io::write_probes));
  std::cout << "gallery: " << data.gallery.size() << " identities -> " << gallery_path << "\n";
  std::cout << "probes: " << data.probes.size() << " signatures -> " << probes_path << "\n";
  if (s.has("test_probes")) {
    const auto test = fapsm::generate_probes(config, data.gallery, "synth.test_probes");
    fapsm::io::save_text(s.text("test_probes"), serialize(test, fapsm::io::write_probes));
    std::cout << "test probes: " << test.size() << " signatures -> " << s.text("test_probes") << "\n";
  }
  return 0;
}

int cmd_train(const Settings& s) {
  const auto config = pipeline_config(s);
  const auto gallery = fapsm::io::load_gallery(s.text("gallery"));
  const auto probes = fapsm::io::load_probes(s.text("probes"));
  const auto model_path = s.text("model");
  const auto weights_path = s.text("weights");
  const auto report = fapsm::train(gallery, probes, config);
  fapsm::io::save_text(model_path, serialize(report.matcher.model, fapsm::io::write_model));
  fapsm::io::save_text(weights_path, serialize(report.matcher.weights, fapsm::io::write_weights));
  std::ostringstream os;
  os << "training probes: " << probes.size() << "\n";
  os << "baseline rank-1: " << fapsm::format_fixed(report.baseline_accuracy, 6) << "\n";
  os << "fapsm rank-1: " << fapsm::format_fixed(report.fapsm_accuracy, 6) << "\n";
  os << "weights:";
  for (double q : report.matcher.weights.weights) os << ' ' << fapsm::format_fixed(q, 6);
  os << "\n";
  emit(s, os.str());
  return 0;
}

fapsm::TrainedMatcher load_matcher(const Settings& s) {
  return {fapsm::io::load_model(s.text("model")), fapsm::io::load_weights(s.text("weights"))};
}

int cmd_match(const Settings& s) {
  const auto matcher = load_matcher(s);
  const auto gallery = fapsm::io::load_gallery(s.text("gallery"));
  const auto probes = fapsm::io::load_probes(s.text("probes"));
  const auto output = s.text("output");
  const auto outcome = fapsm::match(gallery, probes, matcher);
  fapsm::io::save_text(output, fapsm::format_match_results(outcome));
  std::cout << "matched " << probes.size() << " probes -> " << output << "\n";
  return 0;
}

int cmd_evaluate(const Settings& s) {
  const auto matcher = load_matcher(s);
  const auto gallery = fapsm::io::load_gallery(s.text("gallery"));
  const auto probes = fapsm::io::load_probes(s.text("probes"));
  const auto outcome = fapsm::match(gallery, probes, matcher);
  emit(s, fapsm::evaluate(outcome, probes.truth()).to_text());
  return 0;
}

int cmd_sweep(const Settings& s) {
  const auto config = pipeline_config(s);
  auto candidates = s.reals("candidates");
  if (!s.has("candidates")) candidates = {0.2, 0.3, 0.4, 0.5, 0.6};
  const auto gallery = fapsm::io::load_gallery(s.text("gallery"));
  const auto probes = fapsm::io::load_probes(s.text("probes"));
  emit(s, fapsm::sweep_threshold(gallery, probes, candidates, config).to_text());
  return 0;
}

int cmd_stats(const Settings& s) {
  const auto results = fapsm::io::load_split_results(s.text("input"));
  const double alpha = s.real("alpha", 0.10);
  std::optional<double> q_alpha;
  if (s.has("q_alpha")) q_alpha = s.real("q_alpha", 0.0);
  const auto report = fapsm::significance_report(results, alpha, q_alpha);
  emit(s, report.to_text() + "\n" + report.to_key_values());
  return 0;
}

struct Command {
  std::string name;
  std::string help;
  std::vector<std::string> keys;
  int (*run)(const Settings&);
};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  for (const auto& k : b)
    if (std::find(a.begin(), a.end(), k) == a.end()) a.push_back(k);
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Command> commands = {
      {"generate", "Write a synthetic gallery and labeled probe store",
       concat({"gallery", "probes", "test_probes"}, kSynthKeys), cmd_generate},
      {"train", "Fit the associative model and patch weights on labeled probes",
       concat({"gallery", "probes", "model", "weights", "output"}, kPipelineKeys), cmd_train},
      {"match", "Identify probes with a trained model", {"gallery", "probes", "model", "weights", "output"}, cmd_match},
      {"evaluate", "Rank-1 and per-patch accuracy on labeled probes",
       {"gallery", "probes", "model", "weights", "output"}, cmd_evaluate},
      {"sweep", "Threshold sensitivity table on labeled probes",
       concat({"gallery", "probes", "candidates", "output"}, kPipelineKeys), cmd_sweep},
      {"stats", "Friedman / Iman-Davenport / Bonferroni-Dunn report from a split CSV",
       {"input", "alpha", "q_alpha", "output"}, cmd_stats},
  };

  CLI::App app{"Fully associative patch-based 1-to-N signature matcher"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "Settings file of 'key = value' lines (default: $FAPSM_CONFIG)");

  std::set<std::string> known_keys;
  std::map<std::string, std::map<std::string, std::optional<std::string>>> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : commands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    subs[cmd.name] = sub;
    for (const auto& key : cmd.keys) {
      known_keys.insert(key);
      sub->add_option("--" + key, flags[cmd.name][key]);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    Settings settings;
    if (!config_path) {
      if (const char* env = std::getenv("FAPSM_CONFIG"); env && *env) config_path = env;
    }
    if (config_path) {
      settings.load_file(*config_path);
      for (const auto& [key, value] : settings.values())
        if (!known_keys.contains(key)) throw Error(Errc::invalid_argument, "unknown setting '" + key + "' in " + *config_path);
    }
    for (const auto& cmd : commands) {
      if (!subs[cmd.name]->parsed()) continue;
      for (const auto& [key, value] : flags[cmd.name])
        if (value) settings.set(key, *value);
      return cmd.run(settings);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << fapsm::to_string(e.code()) << "]: " << e.what() << "\n";
    return static_cast<int>(e.error_class());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
