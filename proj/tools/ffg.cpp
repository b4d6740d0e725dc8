// ffg: command-line front end for formal power-series transformations.
//
// Exit status: 0 success, 1 usage/input/numeric error, 2 certified obstruction
// (an Obstruction JSON document is on standard output).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ffg/fixtures.hpp"
#include "ffg/flows.hpp"
#include "ffg/textio.hpp"

namespace {

using namespace ffg;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitObstruction = 2;

struct Options {
  bool json = false;
  std::optional<double> tol;
  std::string out;
};

double default_tolerance() {
  const char* env = std::getenv("FFG_TOL");
  if (env == nullptr || *env == '\0') return kDefaultZeroTol;
  char* end = nullptr;
  const double value = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(value > 0.0)) {
    throw InvalidArgument(std::string("FFG_TOL is not a positive number: ") + env);
  }
  return value;
}

Tolerance tolerance(const Options& opt) {
  const double tol = opt.tol ? *opt.tol : default_tolerance();
  if (!(tol > 0.0)) throw InvalidArgument("--tol must be positive");
  return Tolerance{tol};
}

std::string read_text(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Transformation load(const std::string& path, std::optional<int> order) {
  Transformation u;
  const std::string text = read_text(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && text[first] == '{') {
      u = transformation_from_json(Json::parse(text));
    } else {
      u = read_map(text);
    }
  } catch (const Json::exception& e) {
    throw InvalidArgument(path + ": " + e.what());
  } catch (const PositionedError& e) {
    throw InvalidArgument(path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) +
                          ": " + e.what());
  }
  return order ? u.with_order(*order) : u;
}

void write_output(const Options& opt, const std::string& text) {
  if (opt.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(opt.out, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write " + opt.out);
  f << text;
}

void emit(const Options& opt, const Transformation& u) {
  write_output(opt, opt.json ? to_json(u).dump(2) + "\n" : emit_map(u));
}

int report_obstruction(const Obstruction& ob) {
  std::cout << to_json(ob).dump(2) << "\n";
  return kExitObstruction;
}

int cmd_compose(const Options& opt, const std::string& a, const std::string& b) {
  emit(opt, compose(load(a, {}), load(b, {})));
  return kExitOk;
}

int cmd_inverse(const Options& opt, const std::string& path, std::optional<int> order) {
  emit(opt, inverse(load(path, order), tolerance(opt)));
  return kExitOk;
}

int cmd_root(const Options& opt, const std::string& path, std::optional<int> order, int k,
             bool all_branches) {
  const Transformation u = load(path, order);
  const Tolerance tol = tolerance(opt);
  if (!all_branches) {
    emit(opt, functional_root(u, k, BranchChoice(static_cast<std::size_t>(u.dim()), 0), tol));
    return kExitOk;
  }
  const auto outcomes = functional_root_all_branches(u, k, tol);
  Json table = Json::object();
  table["k"] = k;
  table["order"] = u.order();
  table["branches"] = Json::array();
  int obstructed = 0;
  for (const auto& o : outcomes) {
    Json entry;
    entry["branch"] = o.branch;
    if (o.ok()) {
      entry["status"] = "ok";
      entry["root"] = to_json(std::get<Transformation>(o.result));
    } else {
      const auto& ob = std::get<Obstruction>(o.result);
      entry["status"] = "obstructed";
      entry["obstruction"] = to_json(ob);
      entry["solved_prefix"] = ob.solved_prefix ? to_json(*ob.solved_prefix) : Json(nullptr);
      ++obstructed;
    }
    table["branches"].push_back(std::move(entry));
  }
  write_output(opt, table.dump(2) + "\n");
  if (outcomes.empty()) {
    std::cerr << "ffg: no branch admits a real linear root\n";
    return kExitError;
  }
  return obstructed == static_cast<int>(outcomes.size()) ? kExitObstruction : kExitOk;
}

int cmd_log(const Options& opt, const std::string& path, std::optional<int> order) {
  emit(opt, log_transform(load(path, order), tolerance(opt)).as_map());
  return kExitOk;
}

int cmd_exp(const Options& opt, const std::string& path, std::optional<int> order, double t) {
  emit(opt, exp_flow(VectorField::from_map(load(path, order)), t));
  return kExitOk;
}

int cmd_iterate(const Options& opt, const std::string& path, std::optional<int> order, double t) {
  emit(opt, iterate(load(path, order), t, tolerance(opt)));
  return kExitOk;
}

int cmd_resonances(const Options& opt, const std::string& path, std::optional<int> max_degree) {
  const Transformation u = load(path, {});
  const auto lambda = eigenvalues(u.linear_part());
  for (const auto& l : lambda) {
    if (std::abs(l) < tolerance(opt).zero_tol) throw NotInvertible("linear part is singular");
  }
  const auto report = find_resonances(lambda, max_degree.value_or(u.order()), tolerance(opt).zero_tol);
  write_output(opt, to_json(report).dump(2) + "\n");
  return kExitOk;
}

int cmd_check(const Options& opt, const std::string& path, const std::string& group) {
  const Transformation u = load(path, {});
  const GroupTag tag = parse_group_tag(group);
  const auto classes = classify(u, tolerance(opt));
  const bool member = classes.contains(tag);
  if (opt.json) {
    Json j;
    j["group"] = to_string(tag);
    j["member"] = member;
    j["classes"] = Json::array();
    for (auto c : classes) j["classes"].push_back(to_string(c));
    write_output(opt, j.dump(2) + "\n");
  } else {
    std::string line = (member ? "member of " : "not a member of ") + to_string(tag);
    if (!classes.empty()) {
      line += " (classes:";
      for (auto c : classes) line += " " + to_string(c);
      line += ")";
    }
    write_output(opt, line + "\n");
  }
  return member ? kExitOk : kExitError;
}

int cmd_fixtures(const std::string& dir, bool check) {
  namespace fs = std::filesystem;
  int stale = 0;
  if (!check) fs::create_directories(dir);
  for (const auto& f : fixtures::canonical_fixture_files()) {
    const fs::path path = fs::path(dir) / f.name;
    if (check) {
      std::string current;
      try {
        current = read_text(path.string());
      } catch (const Error&) {
      }
      if (current != f.text) {
        std::cerr << "ffg: " << path.string() << " differs from its generator\n";
        ++stale;
      }
      continue;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << f.text;
  }
  return stale == 0 ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Formal power-series transformations: roots, logarithms and flows"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_flag("--json", opt.json, "Emit JSON instead of map text");
  app.add_option("--tol", opt.tol, "Zero tolerance (default 1e-9 or $FFG_TOL)");
  app.add_option("-o,--out", opt.out, "Write the result to a file");

  std::string file_a, file_b, group, dir;
  std::optional<int> order, max_degree;
  int k = 2;
  int n = 2;
  int seed = 0;
  double t = 1.0;
  bool all_branches = false;
  bool repeat = false;
  bool check_only = false;
  int status = kExitOk;
  std::function<int()> run;

  auto add_order = [&](CLI::App* sub) {
    sub->add_option("--order", order, "Truncate the input to this order (downward only)")
        ->check(CLI::Range(1, kMaxOrder));
  };

  auto* compose_cmd = app.add_subcommand("compose", "Compose two maps: a o b");
  compose_cmd->add_option("a", file_a, "Outer map file")->required();
  compose_cmd->add_option("b", file_b, "Inner map file")->required();
  compose_cmd->callback([&] { run = [&] { return cmd_compose(opt, file_a, file_b); }; });

  auto* inverse_cmd = app.add_subcommand("inverse", "Compositional inverse");
  inverse_cmd->add_option("map", file_a, "Map file")->required();
  add_order(inverse_cmd);
  inverse_cmd->callback([&] { run = [&] { return cmd_inverse(opt, file_a, order); }; });

  auto* sqrt_cmd = app.add_subcommand("sqrt", "Functional root g with g o ... o g = u");
  sqrt_cmd->add_option("map", file_a, "Map file")->required();
  add_order(sqrt_cmd);
  sqrt_cmd->add_option("--k", k, "Root index")->check(CLI::Range(2, 16));
  sqrt_cmd->add_flag("--all-branches", all_branches, "Try every branch of the linear root");
  sqrt_cmd->callback([&] { run = [&] { return cmd_root(opt, file_a, order, k, all_branches); }; });

  auto* log_cmd = app.add_subcommand("log", "Formal logarithm (vector field X with exp X = u)");
  log_cmd->add_option("map", file_a, "Map file")->required();
  add_order(log_cmd);
  log_cmd->callback([&] { run = [&] { return cmd_log(opt, file_a, order); }; });

  auto* exp_cmd = app.add_subcommand("exp", "Time-t flow of a vector field");
  exp_cmd->add_option("field", file_a, "Vector field file (map text format)")->required();
  add_order(exp_cmd);
  exp_cmd->add_option("--t", t, "Time");
  exp_cmd->callback([&] { run = [&] { return cmd_exp(opt, file_a, order, t); }; });

  auto* iterate_cmd = app.add_subcommand("iterate", "Continuous iterate u^t");
  iterate_cmd->add_option("map", file_a, "Map file")->required();
  add_order(iterate_cmd);
  iterate_cmd->add_option("--t", t, "Iteration exponent");
  iterate_cmd->callback([&] { run = [&] { return cmd_iterate(opt, file_a, order, t); }; });

  auto* res_cmd = app.add_subcommand("resonances", "Resonance report of the linear part");
  res_cmd->add_option("map", file_a, "Map file")->required();
  res_cmd->add_option("--max-degree", max_degree, "Largest monomial degree (default: the order)")
      ->check(CLI::Range(2, kMaxOrder));
  res_cmd->callback([&] { run = [&] { return cmd_resonances(opt, file_a, max_degree); }; });

  auto* check_cmd = app.add_subcommand("check", "Subgroup membership test");
  check_cmd->add_option("map", file_a, "Map file")->required();
  check_cmd->add_option("--group", group, "gs, ss, bl or bu")->required();
  check_cmd->callback([&] { run = [&] { return cmd_check(opt, file_a, group); }; });

  auto* gen_bl = app.add_subcommand("gen-bl", "Random element of B_l");
  gen_bl->add_option("--n", n, "Dimension")->check(CLI::Range(1, 4));
  gen_bl->add_option("--order", order, "Truncation order")->check(CLI::Range(1, 10));
  gen_bl->add_option("--seed", seed, "Seed")->required();
  gen_bl->add_flag("--repeat", repeat, "Plant a repeated eigenvalue");
  gen_bl->callback([&] {
    run = [&] {
      emit(opt, fixtures::random_bl(n, order.value_or(8), static_cast<std::uint64_t>(seed), repeat));
      return kExitOk;
    };
  });

  auto* gen_ss = app.add_subcommand("gen-ss", "Random area/volume preserving map");
  gen_ss->add_option("--n", n, "Dimension")->check(CLI::Range(1, kMaxVars));
  gen_ss->add_option("--order", order, "Truncation order")->check(CLI::Range(1, kMaxOrder));
  gen_ss->add_option("--seed", seed, "Seed")->required();
  gen_ss->callback([&] {
    run = [&] {
      emit(opt, fixtures::random_ss(n, order.value_or(6), static_cast<std::uint64_t>(seed)));
      return kExitOk;
    };
  });

  auto* fixtures_cmd = app.add_subcommand("fixtures", "Write or verify the canonical fixture files");
  fixtures_cmd->add_option("--dir", dir, "Fixture directory")->required();
  fixtures_cmd->add_flag("--check", check_only, "Fail if a file differs from its generator");
  fixtures_cmd->callback([&] { run = [&] { return cmd_fixtures(dir, check_only); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    status = run();
  } catch (const ObstructionError& e) {
    status = report_obstruction(e.obstruction());
  } catch (const std::exception& e) {
    std::cerr << "ffg: " << e.what() << "\n";
    status = kExitError;
  }
  std::cout.flush();
  return status;
}
