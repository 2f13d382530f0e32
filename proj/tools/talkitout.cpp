// talkitout: play, rollout, eval, train and serve front end.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "talkitout/agents.hpp"
#include "talkitout/config.hpp"
#include "talkitout/eval.hpp"
#include "talkitout/learner/train.hpp"
#include "talkitout/rollout.hpp"
#include "talkitout/serialize.hpp"
#include "talkitout/wire.hpp"
#include "talkitout/world.hpp"

namespace fs = std::filesystem;
using namespace talkitout;

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kVariantNames{"original", "no-liar", "door-only"};
const std::vector<std::string> kAgentNames{"random", "oracle-privileged", "oracle-social", "done", "policy"};

std::string rate(double r) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << r;
  return s.str();
}

AgentFactory agent_factory(const std::string& name, const std::string& checkpoint, bool sample,
                           std::uint64_t seed) {
  if (name == "policy") {
    if (checkpoint.empty()) throw UsageError("--agent policy requires --checkpoint");
    auto net = std::make_shared<const learner::PolicyNet>(learner::PolicyNet::load(checkpoint));
    if (net->input_size() != learner::kInputSize) throw Error("checkpoint input size does not match the encoder");
    return [net, sample, seed] { return std::make_unique<learner::PolicyAgent>(net, !sample, seed); };
  }
  if (!checkpoint.empty()) throw UsageError("--checkpoint only applies to --agent policy");
  return [name, seed] { return make_scripted_agent(name, seed); };
}

// ---- play

struct PlayOptions {
  std::uint64_t seed = 0;
  std::string variant = "original";
  std::string history = "current";
  bool no_color = false;
};

std::string colorize(const std::string& frame, bool color) {
  if (!color) return frame;
  // The trailing status line is left alone.
  const auto grid_end = frame.rfind("\nt=");
  std::string out;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const char c = frame[i];
    const char* code = nullptr;
    switch (c) {
      case 'r': code = "31"; break;
      case 'g': code = "32"; break;
      case 'b': code = "34"; break;
      case 'p': code = "35"; break;
      case 'y': code = "33"; break;
      case 'a': code = "90"; break;
      case 'W': case 'G': code = "1;36"; break;
      case '^': case '>': case 'v': case '<': code = "1;37"; break;
      default: break;
    }
    if (code && i < grid_end) {
      out += "\x1b[";
      out += code;
      out += 'm';
      out += c;
      out += "\x1b[0m";
    } else {
      out += c;
    }
  }
  return out;
}

constexpr const char* kPlayHelp =
    "keys: l=turn_left r=turn_right f=forward k=pickup o=drop t=toggle x=done .=no move\n"
    "      append an utterance index 0-63 to speak, e.g. 'f 16' or '. 16'; 'u' lists utterances; q quits\n";

int run_play(const PlayOptions& o) {
  EnvConfig cfg;
  cfg.variant = parse_variant(o.variant);
  cfg.history_mode = parse_history_mode(o.history);
  const bool color = !o.no_color && std::getenv("NO_COLOR") == nullptr;
  auto [state, obs] = reset(cfg, o.seed);
  std::cout << kPlayHelp << colorize(render_ascii(state), color);
  std::string line;
  while (state.status == Status::running && std::cout << "> " << std::flush && std::getline(std::cin, line)) {
    std::istringstream in(line);
    std::string key;
    if (!(in >> key)) continue;
    if (key == "q") break;
    if (key == "u") {
      for (int i = 0; i < kNumUtterances; ++i) std::cout << i << ": " << render(Utterance::from_flat(i)) << '\n';
      continue;
    }
    Action a;
    static const std::string keys = "lrfkotx";
    if (key.size() != 1 || (key != "." && keys.find(key[0]) == std::string::npos)) {
      std::cout << kPlayHelp;
      continue;
    }
    if (key != ".") a.primitive = static_cast<Primitive>(keys.find(key[0]));
    if (int idx; in >> idx) {
      if (idx < 0 || idx >= kNumUtterances) {
        std::cout << "utterance index out of range\n";
        continue;
      }
      a.speech = Utterance::from_flat(idx);
      std::cout << "Agent: " << render(*a.speech) << '\n';
    }
    const auto r = step(state, a);
    for (const auto& l : r.observation.heard) std::cout << l.serialize() << '\n';
    std::cout << colorize(render_ascii(state), color);
    if (r.done) std::cout << "reward=" << format_decimal(r.reward) << '\n';
  }
  return 0;
}

// ---- rollout

struct RolloutOptions {
  std::string agent = "random";
  std::string checkpoint;
  bool sample = false;
  std::size_t episodes = 100;
  std::uint64_t seed = 0;
  std::string variant = "original";
  std::string history = "current";
  std::string log;
  unsigned workers = 1;
};

int run_rollout(const RolloutOptions& o) {
  EnvConfig cfg;
  cfg.variant = parse_variant(o.variant);
  cfg.history_mode = parse_history_mode(o.history);
  const auto factory = agent_factory(o.agent, o.checkpoint, o.sample, o.seed);
  const auto seeds = TestSet::generate(cfg.variant, o.seed, o.episodes).seeds;
  const unsigned w = std::max(1u, o.workers);
  std::vector<std::unique_ptr<Agent>> agents;
  for (unsigned i = 0; i < w; ++i) agents.push_back(factory());
  struct Episode {
    EpisodeOutcome outcome;
    std::string log;
  };
  const bool logging = !o.log.empty();
  auto episodes = parallel_map(seeds.size(), w, [&](std::size_t i, unsigned worker) {
    Episode e;
    RecordSink sink;
    if (logging) sink = [&](const TrajectoryRecord& r) { e.log += to_json(r).dump() + "\n"; };
    e.outcome = run_episode(cfg, seeds[i], *agents[worker], sink);
    return e;
  });
  if (logging) {
    std::ofstream out(o.log, std::ios::binary);
    if (!out) throw Error("cannot write " + o.log);
    for (const auto& e : episodes) out << e.log;
  }
  std::vector<EpisodeOutcome> outcomes;
  for (auto& e : episodes) outcomes.push_back(std::move(e.outcome));
  const auto report = summarize(o.agent, cfg.variant, std::move(outcomes));
  std::cout << "episodes=" << seeds.size() << '\n'
            << "success_rate=" << rate(report.success_rate) << '\n'
            << "mean_reward=" << format_decimal(report.mean_reward) << '\n'
            << "timeout_rate=" << rate(report.timeout_rate) << '\n'
            << "invalid_rate=" << rate(report.invalid_rate) << '\n';
  return 0;
}

// ---- eval

struct EvalOptions {
  std::vector<std::string> agents{"random"};
  std::vector<std::string> variants{"original", "no-liar"};
  std::string checkpoint;
  bool sample = false;
  std::uint64_t seed = 0;
  std::size_t episodes = kTestSetSize;
  std::string testset_dir;
  std::string json_out;
  bool outcomes = false;
  unsigned workers = 1;
};

// Test sets persist as <dir>/<variant>.json; an existing file is reused as is.
TestSet obtain_testset(Variant v, const EvalOptions& o) {
  if (o.testset_dir.empty()) return TestSet::generate(v, o.seed, o.episodes);
  const auto path = fs::path(o.testset_dir) / (std::string(to_string(v)) + ".json");
  if (fs::exists(path)) {
    auto ts = TestSet::load(path.string());
    if (ts.variant != v) throw Error(path.string() + " holds a different variant");
    return ts;
  }
  fs::create_directories(o.testset_dir);
  auto ts = TestSet::generate(v, o.seed, o.episodes);
  ts.save(path.string());
  return ts;
}

int run_eval(const EvalOptions& o) {
  std::vector<EvalReport> reports;
  for (const auto& variant : o.variants) {
    const auto ts = obtain_testset(parse_variant(variant), o);
    for (const auto& agent : o.agents) {
      reports.push_back(evaluate(agent, agent_factory(agent, o.checkpoint, o.sample, o.seed), ts, {}, o.workers));
    }
  }
  json j = json::array();
  for (const auto& r : reports) j.push_back(report_to_json(r, o.outcomes));
  if (o.json_out.empty()) {
    std::cout << j.dump() << '\n';
  } else {
    std::ofstream out(o.json_out, std::ios::binary);
    if (!out) throw Error("cannot write " + o.json_out);
    out << j.dump(2) << '\n';
  }
  std::cout << report_table(reports);
  return 0;
}

// ---- train

struct TrainOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<long> total_steps;
  std::string curve;
  std::string checkpoint;
  std::optional<unsigned> workers;
};

int run_train(const TrainOptions& o) {
  learner::TrainConfig cfg;
  if (!o.config.empty()) cfg = load_train_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.variant) cfg.env.variant = parse_variant(*o.variant);
  if (o.total_steps) cfg.total_steps = *o.total_steps;
  if (o.workers) cfg.workers = *o.workers;
  learner::validate(cfg);

  std::ofstream curve_file;
  std::ostream* curve = &std::cout;
  if (!o.curve.empty()) {
    curve_file.open(o.curve, std::ios::binary);
    if (!curve_file) throw Error("cannot write " + o.curve);
    curve = &curve_file;
  }
  learner::write_curve_header(*curve);
  learner::Trainer trainer(cfg);
  const auto result = trainer.run([&](const learner::CurvePoint& p, const learner::PolicyNet&) {
    learner::write_curve_row(*curve, p);
    curve->flush();
    return true;
  });
  if (!o.checkpoint.empty()) trainer.net().save(o.checkpoint);
  if (result.halted) {
    std::cerr << "training halted: " << result.diagnostic << '\n';
    return kRuntimeError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TalkItOut social grid-world simulator and evaluation harness"};
  app.require_subcommand(1);

  PlayOptions play;
  auto* play_cmd = app.add_subcommand("play", "Interactive ASCII episode for debugging (NO_COLOR disables color)");
  play_cmd->add_option("--seed", play.seed, "Episode seed")->capture_default_str();
  play_cmd->add_option("--variant", play.variant, "Environment variant")->check(CLI::IsMember(kVariantNames))->capture_default_str();
  play_cmd->add_option("--history-mode", play.history, "Language channel: current or full_history")
      ->check(CLI::IsMember({"current", "full_history"}))->capture_default_str();
  play_cmd->add_flag("--no-color", play.no_color, "Disable ANSI color");

  RolloutOptions ro;
  auto* ro_cmd = app.add_subcommand("rollout", "Run episodes with an agent and write JSONL trajectories");
  ro_cmd->add_option("--agent", ro.agent, "Agent")->check(CLI::IsMember(kAgentNames))->capture_default_str();
  ro_cmd->add_option("--checkpoint", ro.checkpoint, "Policy checkpoint for --agent policy");
  ro_cmd->add_flag("--sample", ro.sample, "Sample policy actions instead of taking the mode");
  ro_cmd->add_option("--episodes", ro.episodes, "Number of episodes")->check(CLI::PositiveNumber)->capture_default_str();
  ro_cmd->add_option("--seed", ro.seed, "Master seed for episode seeds and agents")->capture_default_str();
  ro_cmd->add_option("--variant", ro.variant, "Environment variant")->check(CLI::IsMember(kVariantNames))->capture_default_str();
  ro_cmd->add_option("--history-mode", ro.history, "Language channel: current or full_history")
      ->check(CLI::IsMember({"current", "full_history"}))->capture_default_str();
  ro_cmd->add_option("--log", ro.log, "JSONL trajectory log path");
  ro_cmd->add_option("--workers", ro.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  EvalOptions ev;
  auto* ev_cmd = app.add_subcommand("eval", "Evaluate agents on frozen test sets; prints JSON and a table");
  ev_cmd->add_option("--agent", ev.agents, "Agents (repeatable)")->check(CLI::IsMember(kAgentNames))->capture_default_str();
  ev_cmd->add_option("--variant", ev.variants, "Variants (repeatable)")->check(CLI::IsMember(kVariantNames))->capture_default_str();
  ev_cmd->add_option("--checkpoint", ev.checkpoint, "Policy checkpoint for --agent policy");
  ev_cmd->add_flag("--sample", ev.sample, "Sample policy actions instead of taking the mode");
  ev_cmd->add_option("--seed", ev.seed, "Master seed for test-set generation")->capture_default_str();
  ev_cmd->add_option("--episodes", ev.episodes, "Test-set size when generating")->check(CLI::PositiveNumber)->capture_default_str();
  ev_cmd->add_option("--testset-dir", ev.testset_dir, "Directory of persisted test sets (created on first use)");
  ev_cmd->add_option("--json", ev.json_out, "Write the JSON report here instead of stdout");
  ev_cmd->add_flag("--outcomes", ev.outcomes, "Include per-seed outcomes in the JSON report");
  ev_cmd->add_option("--workers", ev.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  TrainOptions tr;
  auto* tr_cmd = app.add_subcommand("train", "Train the reference learner; writes a CSV learning curve");
  tr_cmd->add_option("--config", tr.config, "Flat key = value config file")->check(CLI::ExistingFile);
  tr_cmd->add_option("--seed", tr.seed, "Override the config seed");
  tr_cmd->add_option("--variant", tr.variant, "Override the config variant")->check(CLI::IsMember(kVariantNames));
  tr_cmd->add_option("--total-steps", tr.total_steps, "Override the step budget")->check(CLI::PositiveNumber);
  tr_cmd->add_option("--curve", tr.curve, "CSV learning-curve path (default stdout)");
  tr_cmd->add_option("--checkpoint", tr.checkpoint, "Write the final parameters here");
  tr_cmd->add_option("--workers", tr.workers, "Rollout worker threads")->check(CLI::PositiveNumber);

  app.add_subcommand("serve", "Speak the line-delimited JSON protocol on stdin/stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (play_cmd->parsed()) return run_play(play);
    if (ro_cmd->parsed()) return run_rollout(ro);
    if (ev_cmd->parsed()) return run_eval(ev);
    if (tr_cmd->parsed()) return run_train(tr);
    std::ios::sync_with_stdio(false);
    wire::serve(std::cin, std::cout);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
