// SPDX-License-Identifier: Apache-2.0
#include "patternpress/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include "patternpress/coder.hpp"
#include "patternpress/error.hpp"
#include "patternpress/estimators.hpp"
#include "patternpress/numerics.hpp"
#include "patternpress/oracle.hpp"
#include "patternpress/parallel.hpp"
#include "patternpress/redundancy.hpp"
#include "patternpress/samplers.hpp"
#include "patternpress/verify.hpp"

namespace patternpress {
namespace {

using json = nlohmann::ordered_json;

// Mixture truncation used by compress / decompress when none is given; the
// sequential coder tracks every grid component.
constexpr std::uint32_t kCoderMixtureLimit = 64;

// --- I/O ---------------------------------------------------------------------

std::string read_all(std::istream& in, const std::string& what) {
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed to read " + what);
  return data;
}

std::string read_input(const std::string& path, std::istream& in) {
  if (path.empty() || path == "-") return read_all(in, "standard input");
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for reading");
  return read_all(file, "'" + path + "'");
}

void write_output(const std::string& path, std::ostream& out, const std::string& data) {
  if (path.empty() || path == "-") {
    out << data;
    out.flush();
    if (!out) throw IoError("failed to write to standard output");
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << data;
  file.close();
  if (!file) throw IoError("failed to write '" + path + "'");
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::vector<Pattern> parse_pattern_lines(std::string_view text) {
  std::vector<Pattern> out;
  for (std::string_view line : split_lines(text)) out.push_back(parse_pattern(line));
  return out;
}

// Exactly one pattern: the text minus trailing newlines. An empty file is the
// empty pattern.
Pattern parse_single_pattern(std::string_view text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.remove_suffix(1);
  if (text.find('\n') != std::string_view::npos)
    throw DomainError("expected a single pattern line");
  return parse_pattern(text);
}

std::string number(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(text, &used, 0);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw DomainError("invalid --seed '" + text + "'");
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// --- Estimator flags ---------------------------------------------------------

struct EstimatorFlags {
  std::string name = "crp";
  std::string theta;  // empty: default, "auto": m / ln n
  std::optional<double> alpha;
  std::optional<std::uint32_t> i_max;
  std::optional<std::uint32_t> j_max;
};

void add_estimator_flags(CLI::App* sub, EstimatorFlags& f) {
  sub->add_option("--estimator", f.name, "crp, py or mixture")
      ->check(CLI::IsMember({"crp", "py", "mixture"}))
      ->capture_default_str();
  sub->add_option("--theta", f.theta, "strength parameter, or 'auto' for m / ln n");
  sub->add_option("--alpha", f.alpha, "discount parameter (py only)");
  sub->add_option("--imax", f.i_max, "mixture truncation in i (mixture only)");
  sub->add_option("--jmax", f.j_max, "mixture truncation in j (mixture only)");
}

void check_flags(const EstimatorFlags& f) {
  if (f.alpha && f.name != "py") throw DomainError("--alpha is only valid with --estimator py");
  if ((f.i_max || f.j_max) && f.name != "mixture")
    throw DomainError("--imax/--jmax are only valid with --estimator mixture");
  if (!f.theta.empty() && f.name == "mixture")
    throw DomainError("--theta is not valid with --estimator mixture");
}

enum class MixtureDefault { Scoring, Coding };

struct ThetaDefault {
  bool automatic;
  double value;
};

double resolve_theta(const std::string& text, ThetaDefault fallback, std::uint64_t n,
                     std::uint32_t m) {
  const bool automatic = text.empty() ? fallback.automatic : text == "auto";
  if (automatic) return n >= 2 ? select_crp_theta(n, m).theta : 1.0;
  if (text.empty()) return fallback.value;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw DomainError("invalid --theta '" + text + "'");
}

Estimator resolve_estimator(const EstimatorFlags& f, std::uint64_t n, std::uint32_t m,
                            bool auto_theta = false,
                            MixtureDefault mixture = MixtureDefault::Scoring) {
  check_flags(f);
  Estimator e;
  if (f.name == "crp") {
    e = CrpParams{resolve_theta(f.theta, {auto_theta, 1.0}, n, m)};
  } else if (f.name == "py") {
    e = PyParams{f.alpha.value_or(0.5), resolve_theta(f.theta, {auto_theta, 0.5}, n, m)};
  } else {
    MixtureConfig c = default_mixture_config(n);
    if (mixture == MixtureDefault::Coding) {
      c.i_max = std::min(c.i_max, kCoderMixtureLimit);
      c.j_max = std::min(c.j_max, kCoderMixtureLimit);
    }
    if (f.i_max) c.i_max = *f.i_max;
    if (f.j_max) c.j_max = *f.j_max;
    e = c;
  }
  validate(e);
  return e;
}

const char* estimator_name(const Estimator& e) {
  static const char* names[] = {"crp", "py", "mixture"};
  return names[e.index()];
}

json report_json(const RedundancyReport& r) {
  json j;
  j["n"] = r.n;
  j["m"] = r.m;
  j["ln_p_upper"] = r.ln_p_upper;
  j["ln_q"] = finite_or_null(r.ln_q);
  j["redundancy_nats"] = finite_or_null(r.redundancy_nats);
  j["bound_nats"] = r.bound_nats ? finite_or_null(*r.bound_nats) : json(nullptr);
  j["per_symbol"] = finite_or_null(r.per_symbol);
  return j;
}

// --- pattern extract ---------------------------------------------------------

std::vector<std::string> tokenize(std::string_view text, const std::string& mode) {
  std::vector<std::string> tokens;
  if (mode == "line") {
    for (std::string_view line : split_lines(text)) {
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      tokens.emplace_back(line);
    }
  } else if (mode == "word") {
    std::istringstream words{std::string(text)};
    for (std::string w; words >> w;) tokens.push_back(std::move(w));
  } else {
    // UTF-8 code points; line breaks are separators, not tokens.
    for (std::size_t i = 0; i < text.size();) {
      const char c = text[i];
      if (c == '\n' || c == '\r') {
        ++i;
        continue;
      }
      std::size_t j = i + 1;
      while (j < text.size() && (static_cast<unsigned char>(text[j]) & 0xC0) == 0x80) ++j;
      tokens.emplace_back(text.substr(i, j - i));
      i = j;
    }
  }
  return tokens;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Pattern probability estimation, coding and redundancy analysis", "patternpress"};
  app.require_subcommand(1);
  app.fallthrough(false);

  std::string input, output, seed_text = "0xC0FFEE";
  const auto add_io = [&](CLI::App* sub, bool with_output) {
    sub->add_option("-i,--input", input, "input file (default: standard input)");
    if (with_output) sub->add_option("-o,--output", output, "output file (default: standard output)");
  };
  const auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed_text, "random seed")->capture_default_str();
  };
  EstimatorFlags flags;

  // pattern extract
  auto* pattern_cmd = app.add_subcommand("pattern", "pattern utilities");
  pattern_cmd->require_subcommand(1);
  auto* extract_cmd = pattern_cmd->add_subcommand("extract", "pattern of a token sequence");
  std::string token_mode = "char";
  add_io(extract_cmd, true);
  extract_cmd
      ->add_option("--tokens", token_mode,
                   "char (code points, line breaks ignored), word (whitespace-separated) or line")
      ->check(CLI::IsMember({"char", "word", "line"}))
      ->capture_default_str();

  // prob
  auto* prob_cmd = app.add_subcommand("prob", "log-probability of a pattern");
  std::optional<std::string> pattern_text;
  add_io(prob_cmd, false);
  prob_cmd->add_option("--pattern", pattern_text, "pattern given inline, e.g. \"1 2 1\"");
  add_estimator_flags(prob_cmd, flags);

  // compress / decompress
  auto* compress_cmd = app.add_subcommand("compress", "range-code a pattern file");
  add_io(compress_cmd, true);
  add_estimator_flags(compress_cmd, flags);
  auto* decompress_cmd = app.add_subcommand("decompress", "decode a .ptnc artifact");
  add_io(decompress_cmd, true);

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "sample patterns from a source");
  std::string source_spec;
  std::uint64_t length = 0, trials = 1;
  std::string patterns_path;
  simulate_cmd->add_option("--source", source_spec, "source specifier, e.g. zipf:1.2:1000")
      ->required();
  simulate_cmd->add_option("-n,--n", length, "pattern length")->required();
  simulate_cmd->add_option("--trials", trials, "number of patterns")->capture_default_str();
  simulate_cmd->add_option("--patterns", patterns_path, "also write the sampled patterns here");
  add_io(simulate_cmd, true);
  add_seed(simulate_cmd);
  add_estimator_flags(simulate_cmd, flags);

  // redundancy report | sweep
  auto* redundancy_cmd = app.add_subcommand("redundancy", "redundancy reports");
  redundancy_cmd->require_subcommand(1);
  auto* report_cmd = redundancy_cmd->add_subcommand("report", "JSON report per pattern");
  add_io(report_cmd, true);
  add_estimator_flags(report_cmd, flags);
  auto* sweep_cmd = redundancy_cmd->add_subcommand("sweep", "CSV over sampled patterns");
  std::vector<std::uint64_t> lengths;
  sweep_cmd->add_option("--source", source_spec, "source specifier")->required();
  sweep_cmd->add_option("-n,--n", lengths, "pattern lengths (comma-separated)")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--trials", trials, "patterns per length")->capture_default_str();
  add_io(sweep_cmd, true);
  add_seed(sweep_cmd);
  add_estimator_flags(sweep_cmd, flags);

  // oracle prob | maxprob
  auto* oracle_cmd = app.add_subcommand("oracle", "exact small-n computations");
  oracle_cmd->require_subcommand(1);
  auto* oracle_prob_cmd = oracle_cmd->add_subcommand("prob", "exact p(pattern) under a distribution");
  std::string dist_text;
  oracle_prob_cmd->add_option("--dist", dist_text, "comma-separated probabilities");
  oracle_prob_cmd->add_option("--source", source_spec, "finite source specifier");
  oracle_prob_cmd->add_option("--pattern", pattern_text, "pattern, e.g. \"1 2 1\"");
  add_io(oracle_prob_cmd, false);
  add_seed(oracle_prob_cmd);
  auto* maxprob_cmd = oracle_cmd->add_subcommand("maxprob", "numerical sup_p p(pattern)");
  std::optional<std::uint32_t> budget;
  maxprob_cmd->add_option("--pattern", pattern_text, "pattern, e.g. \"1 1 2\"");
  maxprob_cmd->add_option("--budget", budget, "number of discrete atoms (default: m)");
  add_io(maxprob_cmd, false);
  add_seed(maxprob_cmd);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run the invariant suite");
  std::vector<std::string> suites;
  bool list_suites = false;
  verify_cmd->add_option("--suite", suites, "suite name (repeatable; default: all)");
  verify_cmd->add_flag("--list", list_suites, "list suite names");
  add_seed(verify_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  const auto one_pattern = [&]() -> Pattern {
    if (pattern_text) return parse_pattern(*pattern_text);
    return parse_single_pattern(read_input(input, in));
  };

  try {
    if (extract_cmd->parsed()) {
      const auto tokens = tokenize(read_input(input, in), token_mode);
      write_output(output, out, format_pattern(extract_pattern(tokens)) + "\n");
    } else if (prob_cmd->parsed()) {
      const Pattern p = one_pattern();
      const Estimator e = resolve_estimator(flags, p.size(), p.distinct());
      const double lp = log_prob(e, p);
      json j;
      j["ln_prob"] = finite_or_null(lp);
      j["bits"] = finite_or_null(-nats_to_bits(lp));
      out << j.dump() << "\n";
    } else if (compress_cmd->parsed()) {
      const Pattern p = parse_single_pattern(read_input(input, in));
      const Estimator e =
          resolve_estimator(flags, p.size(), p.distinct(), false, MixtureDefault::Coding);
      const auto bytes = serialize(encode(e, p));
      write_output(output, out, std::string(bytes.begin(), bytes.end()));
    } else if (decompress_cmd->parsed()) {
      const std::string data = read_input(input, in);
      const std::vector<std::uint8_t> bytes(data.begin(), data.end());
      const Pattern p = decode(parse(bytes));
      write_output(output, out, format_pattern(p) + "\n");
    } else if (simulate_cmd->parsed()) {
      const std::uint64_t seed = parse_seed(seed_text);
      check_flags(flags);
      if (trials == 0) throw DomainError("--trials must be >= 1");
      const Source source = parse_source(source_spec, seed);
      std::vector<Pattern> patterns(trials);
      parallel_for(trials, [&](std::size_t t) {
        patterns[t] = sample_pattern(source, length, seed, t);
      });
      json results = json::array();
      KahanSum distinct, redundancy;
      for (std::size_t t = 0; t < trials; ++t) {
        const Pattern& p = patterns[t];
        const Estimator e = resolve_estimator(flags, p.size(), p.distinct());
        const RedundancyReport r = pattern_redundancy(e, p);
        json row;
        row["trial"] = t;
        row["m"] = r.m;
        row["ln_q"] = finite_or_null(r.ln_q);
        row["ln_p_upper"] = r.ln_p_upper;
        row["redundancy_nats"] = finite_or_null(r.redundancy_nats);
        results.push_back(std::move(row));
        distinct.add(r.m);
        redundancy.add(r.redundancy_nats);
      }
      json j;
      j["seed"] = seed;
      j["source"] = source_spec;
      j["n"] = length;
      j["trials"] = trials;
      j["estimator"] = flags.name;
      j["mean_distinct"] = distinct.value() / static_cast<double>(trials);
      j["mean_redundancy_nats"] = finite_or_null(redundancy.value() / static_cast<double>(trials));
      j["results"] = std::move(results);
      if (!patterns_path.empty()) {
        std::string text;
        for (const auto& p : patterns) text += format_pattern(p) + "\n";
        write_output(patterns_path, out, text);
      }
      write_output(output, out, j.dump() + "\n");
    } else if (report_cmd->parsed()) {
      json reports = json::array();
      for (const Pattern& p : parse_pattern_lines(read_input(input, in))) {
        const Estimator e = resolve_estimator(flags, p.size(), p.distinct(), true);
        reports.push_back(report_json(pattern_redundancy(e, p)));
      }
      write_output(output, out, reports.dump() + "\n");
    } else if (sweep_cmd->parsed()) {
      const std::uint64_t seed = parse_seed(seed_text);
      check_flags(flags);
      if (trials == 0) throw DomainError("--trials must be >= 1");
      const Source source = parse_source(source_spec, seed);
      std::vector<std::string> rows(lengths.size() * trials);
      parallel_for(rows.size(), [&](std::size_t idx) {
        const std::uint64_t n = lengths[idx / trials];
        const Pattern p = sample_pattern(source, n, seed, idx);
        const Estimator e = resolve_estimator(flags, p.size(), p.distinct(), true);
        const RedundancyReport r = pattern_redundancy(e, p);
        std::string theta, alpha;
        if (const auto* c = std::get_if<CrpParams>(&e)) theta = number(c->theta);
        if (const auto* c = std::get_if<PyParams>(&e)) {
          theta = number(c->theta);
          alpha = number(c->alpha);
        }
        rows[idx] = std::to_string(r.n) + "," + std::to_string(r.m) + "," + estimator_name(e) +
                    "," + theta + "," + alpha + "," + number(r.redundancy_nats) + "," +
                    (r.bound_nats ? number(*r.bound_nats) : std::string()) + "," +
                    number(r.per_symbol) + "\n";
      });
      std::string csv = "n,m,estimator,theta,alpha,redundancy_nats,bound_nats,per_symbol\n";
      for (const auto& row : rows) csv += row;
      write_output(output, out, csv);
    } else if (oracle_prob_cmd->parsed()) {
      const std::uint64_t seed = parse_seed(seed_text);
      if (dist_text.empty() == source_spec.empty())
        throw DomainError("give exactly one of --dist and --source");
      std::optional<DiscreteDistribution> dist;
      if (!dist_text.empty()) {
        std::vector<double> probs;
        std::stringstream items(dist_text);
        for (std::string item; std::getline(items, item, ',');) {
          try {
            std::size_t used = 0;
            probs.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
          } catch (const std::exception&) {
            throw DomainError("invalid probability '" + item + "' in --dist");
          }
        }
        dist.emplace(std::move(probs));
      } else {
        Source s = parse_source(source_spec, seed);
        if (!std::holds_alternative<DiscreteDistribution>(s))
          throw DomainError("oracle prob needs a finite distribution source");
        dist.emplace(std::get<DiscreteDistribution>(std::move(s)));
      }
      const Pattern p = one_pattern();
      const PrevalenceProfile prof = profile(p);
      const double lp = pattern_log_prob_exact(*dist, prof);
      json j;
      j["ln_prob"] = finite_or_null(lp);
      j["prob"] = std::exp(lp);
      j["envelope_ln_bound"] = envelope_log_bound(prof).log_bound;
      j["seed"] = seed;
      out << j.dump() << "\n";
    } else if (maxprob_cmd->parsed()) {
      const std::uint64_t seed = parse_seed(seed_text);
      const Pattern p = one_pattern();
      const std::uint32_t k = budget.value_or(std::max<std::uint32_t>(p.distinct(), 1));
      const MaxProbResult r = max_pattern_prob(p, k, seed);
      json j;
      j["probability"] = r.probability;
      j["ln_probability"] = finite_or_null(std::log(r.probability));
      j["envelope_ln_bound"] = envelope_log_bound(profile(p)).log_bound;
      j["budget"] = k;
      j["atoms"] = r.atoms;
      j["diffuse"] = r.diffuse;
      j["seed"] = seed;
      out << j.dump() << "\n";
    } else if (verify_cmd->parsed()) {
      const std::uint64_t seed = parse_seed(seed_text);
      if (list_suites) {
        for (const auto& s : verify_suites()) out << s.name << "  " << s.title << "\n";
        return 0;
      }
      if (suites.empty()) {
        for (const auto& s : verify_suites()) suites.emplace_back(s.name);
      }
      for (const auto& name : suites) {
        bool known = false;
        for (const auto& s : verify_suites()) known = known || s.name == name;
        if (!known) throw DomainError("unknown suite '" + name + "'");
      }
      bool all = true;
      out << "seed " << seed << "\n";
      for (const auto& name : suites) {
        const CheckResult r = run_check(name, seed);
        all = all && r.passed;
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << " ["
            << std::fixed << std::setprecision(1) << r.seconds << "s]\n"
            << std::defaultfloat;
      }
      return all ? 0 : 1;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace patternpress
