#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "gaugelab/descent.hpp"
#include "gaugelab/gamma.hpp"
#include "gaugelab/io.hpp"

using namespace gaugelab;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheck = 1;
constexpr int kExitUsage = 2;

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path, std::string("invalid JSON: ") + e.what());
  }
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw InputError("--out", "cannot write '" + out + "'");
  f << text << '\n';
}

GammaBudget parse_budget(const std::string& s, std::uint64_t seed) {
  const auto x = s.find('x');
  GammaBudget b;
  b.seed = seed;
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    std::size_t u1 = 0, u2 = 0;
    b.starts = std::stoi(s.substr(0, x), &u1);
    b.iterations = std::stoi(s.substr(x + 1), &u2);
    if (u1 != x || u2 != s.size() - x - 1) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    throw InputError("--budget", "expected STARTSxITERS, got '" + s + "'");
  }
  if (b.starts < 1 || b.iterations < 1) throw InputError("--budget", "starts and iterations must be positive");
  return b;
}

double parse_double(const std::string& t, const std::string& field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size() || !std::isfinite(v)) throw InputError(field, "bad number '" + t + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
  return out;
}

// "1,1.5,2,3" or "lo:hi:step".
std::vector<double> parse_axis(const std::string& s, const std::string& field) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw InputError(field, "expected lo:hi:step");
    const double lo = parse_double(parts[0], field), hi = parse_double(parts[1], field), st = parse_double(parts[2], field);
    if (!(st > 0.0) || hi < lo) throw InputError(field, "need step > 0 and hi >= lo");
    const auto count = static_cast<int>(std::floor((hi - lo) / st + 1e-9));
    for (int i = 0; i <= count; ++i) out.push_back(lo + i * st);
  } else {
    for (const auto& t : split(s, ',')) out.push_back(parse_double(t, field));
  }
  if (out.empty()) throw InputError(field, "empty axis");
  for (double v : out)
    if (v < 1.0 || v > 16.0) throw InputError(field, "values must lie in [1, 16]");
  return out;
}

Vec2 parse_vec(const std::string& re, const std::string& im) {
  const auto r = split(re, ',');
  if (r.size() != 2) throw InputError("--vec", "expected two components a,b");
  Vec2 v{parse_double(r[0], "--vec"), parse_double(r[1], "--vec")};
  if (!im.empty()) {
    const auto i = split(im, ',');
    if (i.size() != 2) throw InputError("--vec-im", "expected two components a,b");
    v.z1 += cplx(0.0, parse_double(i[0], "--vec-im"));
    v.z2 += cplx(0.0, parse_double(i[1], "--vec-im"));
  }
  return v;
}

unsigned thread_cap() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GAUGE_LAB_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v < 1) throw std::invalid_argument(env);
      n = std::min(n, static_cast<unsigned>(v));
    } catch (const std::exception&) {
      throw InputError("GAUGE_LAB_THREADS", "expected a positive integer");
    }
  }
  return n;
}

struct GridRow {
  double p = 0.0, q = 0.0;
  GammaWitness w;
  double wall_ms = 0.0;
};

std::vector<GridRow> gamma_grid(const std::vector<double>& ps, const std::vector<double>& qs, const GammaBudget& budget) {
  std::vector<GridRow> rows;
  for (double p : ps)
    for (double q : qs) rows.push_back({p, q, {}, 0.0});
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      const auto t0 = std::chrono::steady_clock::now();
      rows[i].w = gamma_estimate(SpaceDescriptor::bpq(rows[i].p, rows[i].q), budget);
      rows[i].wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const unsigned n = std::min<unsigned>(thread_cap(), static_cast<unsigned>(rows.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  std::sort(rows.begin(), rows.end(), [](const GridRow& a, const GridRow& b) { return std::tie(a.p, a.q) < std::tie(b.p, b.q); });
  return rows;
}

std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct CorpusOutcome {
  bool ok = false;
  std::string line;
};

CorpusOutcome run_corpus_file(const fs::path& path) {
  const json j = read_json(path.string());
  const OperatorPair pair = pair_from_json(j);
  const json& expected = detail::require_key(j, "expected_verdict", path.filename().string());
  DescentOptions opt;
  if (const auto it = j.find("options"); it != j.end()) {
    opt.max_steps = it->value("max_steps", opt.max_steps);
    opt.tol = it->value("tol", opt.tol);
    opt.verify_each_step = it->value("verify_each_step", opt.verify_each_step);
    opt.grid_size = it->value("grid_size", opt.grid_size);
  }
  const RefutationTrace tr = descent_run(pair, opt);
  const std::string got = to_string(tr.verdict);
  bool ok = got == expected.get<std::string>();
  std::string detail = got + " (" + tr.reason + ")";
  if (const auto it = j.find("expected_reason"); it != j.end() && *it != tr.reason) {
    ok = false;
    detail += ", expected reason '" + it->get<std::string>() + "'";
  }
  if (tr.fact && !check_terminal_fact(*tr.fact, pair.space).holds) {
    ok = false;
    detail += ", terminal fact does not re-derive";
  }
  if (to_json(descent_run(pair, opt)).dump() != to_json(tr).dump()) {
    ok = false;
    detail += ", rerun differs";
  }
  return {ok, (ok ? "ok       " : "MISMATCH ") + path.filename().string() + ": " + detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gauge_lab: norms, orthogonality, gamma estimates and isometry descent on two-dimensional spaces"};
  app.require_subcommand(1);

  std::string space_text;
  std::string input;
  std::string out;
  std::string budget_text = "64x500";
  std::uint64_t seed = kDefaultSeed;
  double tol = 1e-6;

  auto* gauge_cmd = app.add_subcommand("gauge", "evaluate the norm of a vector");
  std::string vec_re, vec_im;
  gauge_cmd->add_option("--space", space_text, "lp:p, bpq:p,q or linf, optional :real")->required();
  gauge_cmd->add_option("--vec", vec_re, "real parts a,b")->required();
  gauge_cmd->add_option("--vec-im", vec_im, "imaginary parts a,b");

  auto* bj_cmd = app.add_subcommand("bj", "Birkhoff-James orthogonality of T to S (operator norm)");
  auto* par_cmd = app.add_subcommand("parallel", "norm parallelism of T and S (operator norm)");
  for (auto* c : {bj_cmd, par_cmd}) {
    c->add_option("--input", input, "pair JSON file")->required()->check(CLI::ExistingFile);
    c->add_option("--tol", tol, "tolerance")->check(CLI::PositiveNumber);
    c->add_option("--seed", seed, "seed");
    c->add_option("--out", out, "output file (default stdout)");
  }

  auto* gamma_cmd = app.add_subcommand("gamma", "lower bound for gamma(X) with witness");
  gamma_cmd->add_option("--space", space_text, "space")->required();
  gamma_cmd->add_option("--budget", budget_text, "STARTSxITERS");
  gamma_cmd->add_option("--seed", seed, "seed");
  gamma_cmd->add_option("--out", out, "output file (default stdout)");

  auto* grid_cmd = app.add_subcommand("gamma-grid", "gamma lower bounds over a grid of B_{p,q} spaces, as CSV");
  std::string p_axis = "1,1.5,2,3", q_axis = "1,1.5,2,3";
  grid_cmd->add_option("--p", p_axis, "comma list or lo:hi:step within [1,16]");
  grid_cmd->add_option("--q", q_axis, "comma list or lo:hi:step within [1,16]");
  grid_cmd->add_option("--budget", budget_text, "STARTSxITERS");
  grid_cmd->add_option("--seed", seed, "seed");
  grid_cmd->add_option("--out", out, "output file (default stdout)");

  auto* descent_cmd = app.add_subcommand("descent", "isometry refutation by descent");
  auto* run_cmd = descent_cmd->add_subcommand("run", "run descent on a candidate pair");
  descent_cmd->require_subcommand(1);
  DescentOptions dopt;
  bool structural = false;
  std::string expect;
  run_cmd->add_option("--input", input, "pair JSON file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--max-steps", dopt.max_steps, "step limit")->check(CLI::PositiveNumber);
  run_cmd->add_option("--tol", dopt.tol, "tolerance")->check(CLI::PositiveNumber);
  run_cmd->add_option("--grid", dopt.grid_size, "verification grid size")->check(CLI::Range(256, 1 << 20));
  run_cmd->add_option("--seed", dopt.seed, "seed");
  run_cmd->add_flag("--structural", structural, "record grid deviations without refuting on them");
  run_cmd->add_option("--expect", expect, "exit 1 unless the verdict matches")
      ->check(CLI::IsMember({"Refuted", "IsometryCertified", "Inconclusive"}));
  run_cmd->add_option("--out", out, "certificate file (default stdout)");

  auto* corpus_cmd = app.add_subcommand("corpus", "replay every corpus file and compare with its recorded verdict");
  std::string dir = "corpus";
  corpus_cmd->add_option("--dir", dir, "corpus directory")->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gauge_cmd) {
      const SpaceDescriptor x = parse_space(space_text);
      const Vec2 v = parse_vec(vec_re, vec_im);
      if (x.is_real() && (v.z1.imag() != 0.0 || v.z2.imag() != 0.0))
        throw InputError("--vec-im", "imaginary parts given for a real space");
      const json j{{"space", to_json(x)}, {"vec", json::array({to_json(v.z1), to_json(v.z2)})}, {"gauge", gauge(v, x)}};
      emit(j.dump(2), out);
      return kExitOk;
    }
    if (*bj_cmd || *par_cmd) {
      const OperatorPair p = pair_from_json(read_json(input));
      json j{{"pair", to_json(p)}, {"tol", tol}};
      bool agree = false;
      if (*bj_cmd) {
        const OrthVerdict def = bj_orthogonal_definitional(p.t, p.s, tol);
        const OrthVerdict wit = bj_witness_search(p.t, p.s, tol, seed);
        agree = def.holds == wit.holds;
        j["definitional"] = to_json(def);
        j["witness_search"] = to_json(wit);
      } else {
        const ParallelVerdict scan = norm_parallel(p.t, p.s, tol);
        const ParallelVerdict wit = parallel_witness_search(p.t, p.s, tol);
        agree = scan.holds == wit.holds;
        j["phase_scan"] = to_json(scan);
        j["witness_search"] = to_json(wit);
      }
      j["agree"] = agree;
      emit(j.dump(2), out);
      return agree ? kExitOk : kExitCheck;
    }
    if (*gamma_cmd) {
      const SpaceDescriptor x = parse_space(space_text);
      const GammaBudget b = parse_budget(budget_text, seed);
      const PropertyPVerdict v = property_p_verdict(x, b);
      const json j{{"space", to_json(x)},
                   {"budget", {{"starts", b.starts}, {"iterations", b.iterations}, {"seed", b.seed}}},
                   {"value", v.witness.value},
                   {"witness", to_json(v.witness)},
                   {"property_p", v.kind == PropertyPVerdict::Kind::Fails ? "Fails" : "NotRefuted"},
                   {"margin", kPropertyPMargin}};
      emit(j.dump(2), out);
      return kExitOk;
    }
    if (*grid_cmd) {
      const std::vector<double> ps = parse_axis(p_axis, "--p");
      const std::vector<double> qs = parse_axis(q_axis, "--q");
      const GammaBudget b = parse_budget(budget_text, seed);
      const std::vector<GridRow> rows = gamma_grid(ps, qs, b);
      std::ostringstream csv;
      csv << "p,q,value,normA,normB,starts,iters,wall_ms\n";
      bool ok = true;
      for (const GridRow& r : rows) {
        csv << csv_number(r.p) << ',' << csv_number(r.q) << ',' << csv_number(r.w.value) << ','
            << csv_number(r.w.norm_a) << ',' << csv_number(r.w.norm_b) << ',' << b.starts << ',' << b.iterations
            << ',' << std::fixed << std::setprecision(3) << r.wall_ms << std::defaultfloat << '\n';
        if (std::max(r.p, r.q) > 1.0 && !(r.w.value > 1.0 + kPropertyPMargin)) {
          ok = false;
          std::cerr << "check failed: gamma(B_{" << r.p << "," << r.q << "}) estimate " << r.w.value
                    << " does not exceed 1 + " << kPropertyPMargin << '\n';
        }
      }
      std::string text = csv.str();
      text.pop_back();
      emit(text, out);
      return ok ? kExitOk : kExitCheck;
    }
    if (*run_cmd) {
      dopt.verify_each_step = !structural;
      const RefutationTrace tr = descent_run(pair_from_json(read_json(input)), dopt);
      emit(to_json(tr).dump(2), out);
      if (tr.fact && !check_terminal_fact(*tr.fact, tr.input.space).holds)
        throw CheckFailure("terminal fact does not re-derive");
      if (!expect.empty() && expect != to_string(tr.verdict))
        throw CheckFailure("verdict " + std::string(to_string(tr.verdict)) + ", expected " + expect);
      return kExitOk;
    }
    if (*corpus_cmd) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      if (files.empty()) throw InputError("--dir", "no .json files in '" + dir + "'");
      int failures = 0;
      for (const fs::path& f : files) {
        const CorpusOutcome o = run_corpus_file(f);
        std::cout << o.line << '\n';
        failures += !o.ok;
      }
      std::cout << (files.size() - static_cast<std::size_t>(failures)) << "/" << files.size() << " corpus files reproduce\n";
      return failures == 0 ? kExitOk : kExitCheck;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CheckFailure& e) {
    std::cerr << "check failed: " << e.what() << '\n';
    return kExitCheck;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
