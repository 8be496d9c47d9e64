// mgstd: Morse graphs and transition vector fields from time-series data.
//
// Subcommands: simulate, select, morse, vectorfield. Every command is
// deterministic given its full flag set; outputs are data files (CSV, TSV,
// DOT, JSON), never images. Exit codes: 0 ok, 2 usage, 3 bad data,
// 4 numeric or selection failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgstd/mgstd.hpp"
#include "mgstd/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  int jobs = 1;
  std::uint64_t seed = 1;
};

struct InputOpts {
  std::string input_csv;
  std::string model;
  std::string preset;
  std::int64_t n_series = 0;  // 0 = preset default
  bool standardize = false;
  int pca = 0;  // 0 = off
};

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->set_help_flag("--help", "print this help and exit");
  sub->add_option("--config", c.config_path,
                  "JSON file supplying defaults for any flag");
  sub->add_option("--out", c.out_dir, "output directory");
  sub->add_option("--jobs", c.jobs, "worker threads");
  sub->add_option("--seed", c.seed, "RNG seed");
}

void add_input(CLI::App* sub, InputOpts& in) {
  sub->add_option("--input", in.input_csv, "CSV time-series file");
  sub->add_option("--model", in.model, "builtin model: dw1d | saddle2d");
  sub->add_option("--preset", in.preset, "builtin dataset: D1 | D2");
  sub->add_option("--n", in.n_series, "override the preset series count");
  sub->add_flag("--standardize", in.standardize,
                "standardize coordinates before analysis");
  sub->add_option("--pca", in.pca, "project onto this many leading PCs");
}

json load_config(const CommonOpts& c) {
  if (c.config_path.empty()) return json::object();
  std::ifstream in(c.config_path);
  if (!in) throw mgstd::data_error("cannot read config " + c.config_path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw mgstd::data_error(c.config_path + ": " + e.what());
  }
}

template <typename T>
void cfg(const json& j, const char* key, const CLI::App* sub, const char* opt,
         T& var) {
  if (j.contains(key) && sub->count(opt) == 0) var = j.at(key).get<T>();
}

mgstd::Dataset load_dataset(const InputOpts& in, const CommonOpts& c) {
  const bool from_file = !in.input_csv.empty();
  const bool from_model = !in.model.empty() || !in.preset.empty();
  if (from_file == from_model)
    throw usage_error(
        "exactly one input source: --input CSV, or --model with --preset");
  mgstd::Dataset d(1);
  if (from_file) {
    std::ifstream f(in.input_csv);
    if (!f) throw mgstd::data_error("cannot read " + in.input_csv);
    d = mgstd::ingest_csv(f);
  } else {
    if (in.model.empty() || in.preset.empty())
      throw usage_error("--model and --preset are required together");
    d = mgstd::make_preset_dataset(in.model, in.preset, c.seed, in.n_series,
                                   c.jobs);
  }
  if (in.pca > 0)
    d = mgstd::pca_project(d, in.pca);
  else if (in.standardize)
    d = mgstd::standardize(d);
  return d;
}

std::vector<double> resolve_delta(std::vector<double> delta, int m) {
  if (delta.empty()) return std::vector<double>(m, 0.0);
  if (delta.size() == 1 && m > 1) return std::vector<double>(m, delta[0]);
  if (static_cast<int>(delta.size()) != m)
    throw usage_error("--delta needs 1 or " + std::to_string(m) + " values");
  return delta;
}

std::ofstream open_out(const CommonOpts& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  const fs::path p = fs::path(c.out_dir) / name;
  std::ofstream f(p);
  if (!f) throw mgstd::data_error("cannot write " + p.string());
  return f;
}

mgstd::ArrowDirection parse_direction(const std::string& s) {
  if (s == "flow") return mgstd::ArrowDirection::flow;
  if (s == "antiflow") return mgstd::ArrowDirection::antiflow;
  throw usage_error("--direction must be flow or antiflow");
}

mgstd::CenterWeighting parse_interp(const std::string& s) {
  if (s == "source-major") return mgstd::CenterWeighting::source_major;
  if (s == "target-major") return mgstd::CenterWeighting::target_major;
  throw usage_error("--interp must be source-major or target-major");
}

// ---------------------------------------------------------------- simulate

int run_simulate(const CLI::App* sub, CommonOpts& c, InputOpts& in) {
  const json j = load_config(c);
  cfg(j, "out", sub, "--out", c.out_dir);
  cfg(j, "jobs", sub, "--jobs", c.jobs);
  cfg(j, "seed", sub, "--seed", c.seed);
  cfg(j, "model", sub, "--model", in.model);
  cfg(j, "preset", sub, "--preset", in.preset);
  cfg(j, "n_series", sub, "--n", in.n_series);
  if (in.model.empty() || in.preset.empty())
    throw usage_error("simulate needs --model and --preset");

  const mgstd::PresetSpec spec =
      mgstd::preset(in.model, in.preset, c.seed, in.n_series);
  mgstd::Dataset d = mgstd::simulate(spec.model, spec.config, c.jobs);
  if (spec.interleave > 1) d = mgstd::reindex_interleave(d, spec.interleave);

  auto csv = open_out(c, "dataset.csv");
  mgstd::write_csv(d, csv);
  json side;
  side["model"] = in.model;
  side["n_series"] = spec.config.n_series;
  side["steps"] = spec.config.steps;
  side["dt_out"] = spec.config.dt_out;
  side["dt_int"] = spec.config.dt_int;
  side["sigma2"] = spec.model.sigma * spec.model.sigma;
  side["box"] = spec.config.box;
  side["seed"] = spec.config.seed;
  side["interleave"] = spec.interleave;
  auto sj = open_out(c, "config.json");
  sj << side.dump(2) << '\n';
  std::cout << "wrote " << d.n_series() << " series, " << d.total_points()
            << " points to " << (fs::path(c.out_dir) / "dataset.csv").string()
            << '\n';
  return 0;
}

// ------------------------------------------------------------------ select

int run_select(const CLI::App* sub, CommonOpts& c, InputOpts& in, double h,
               double rho, double A, std::int64_t mu_max,
               std::vector<double> delta, bool sweep, double increment,
               std::vector<double> h_candidates) {
  const json j = load_config(c);
  cfg(j, "out", sub, "--out", c.out_dir);
  cfg(j, "jobs", sub, "--jobs", c.jobs);
  cfg(j, "seed", sub, "--seed", c.seed);
  cfg(j, "input", sub, "--input", in.input_csv);
  cfg(j, "model", sub, "--model", in.model);
  cfg(j, "preset", sub, "--preset", in.preset);
  cfg(j, "n_series", sub, "--n", in.n_series);
  cfg(j, "standardize", sub, "--standardize", in.standardize);
  cfg(j, "pca", sub, "--pca", in.pca);
  cfg(j, "h", sub, "--h", h);
  cfg(j, "rho", sub, "--rho", rho);
  cfg(j, "A", sub, "--A", A);
  cfg(j, "mu_max", sub, "--mu-max", mu_max);
  cfg(j, "delta", sub, "--delta", delta);
  cfg(j, "sweep_delta", sub, "--sweep-delta", sweep);
  cfg(j, "increment", sub, "--increment", increment);
  cfg(j, "h_candidates", sub, "--h-candidates", h_candidates);

  const mgstd::Dataset d = load_dataset(in, c);
  json report;

  if (!h_candidates.empty()) {
    const mgstd::HRecommendation rec = mgstd::recommend_h(d, h_candidates);
    for (const auto& [cand, curve] : rec.table) {
      char name[64];
      std::snprintf(name, sizeof name, "coverage_h%g.tsv", cand);
      auto f = open_out(c, name);
      f << "n\tportion\n";
      char buf[32];
      for (std::size_t n = 0; n < curve.size(); ++n) {
        std::snprintf(buf, sizeof buf, "%.17g", curve[n]);
        f << (n + 1) << '\t' << buf << '\n';
      }
    }
    report["recommended_h"] = rec.h;
    std::cout << "recommended h = " << rec.h << '\n';
    if (sub->count("--h") == 0 && !j.contains("h")) h = rec.h;
  }

  if (h > 0.0) {
    if (sweep) {
      const mgstd::AveragedMuStar avg =
          mgstd::select_mu_star_averaged(d, h, rho, A, increment, mu_max);
      report["mu_star"] = avg.mu_star;
      report["mu_star_mean"] = avg.mean;
      report["shifts_selected"] = avg.n_selected;
      report["shifts_failed"] = avg.n_failed;
      char mean[32];
      std::snprintf(mean, sizeof mean, "%.6g", avg.mean);
      std::cout << "mu_star = " << avg.mu_star << " (average " << mean
                << " over " << avg.n_selected << " shifts)\n";
    } else {
      const std::vector<double> dl = resolve_delta(delta, d.dim());
      const mgstd::GridSpec grid =
          mgstd::fit_grid(d.dim(), h, dl, mgstd::data_bound(d));
      const mgstd::MuStarSelection sel =
          mgstd::select_mu_star(d, grid, rho, A, mu_max);
      auto f = open_out(c, "mu_star_curve.tsv");
      mgstd::export_curve_tsv(sel.curve, f, "mu_star", "ratio");
      if (!sel.mu_star) {
        auto rj = open_out(c, "selection.json");
        rj << report.dump(2) << '\n';
        std::cout << "no mu_star up to " << mu_max
                  << " brings the size ratio below " << A << '\n';
        return 4;
      }
      report["mu_star"] = *sel.mu_star;
      std::cout << "mu_star = " << *sel.mu_star << '\n';
    }
  } else if (h_candidates.empty()) {
    throw usage_error("select needs --h or --h-candidates");
  }

  auto rj = open_out(c, "selection.json");
  rj << report.dump(2) << '\n';
  return 0;
}

// ------------------------------------------------------------------- morse

int run_morse(const CLI::App* sub, CommonOpts& c, InputOpts& in, double h,
              double rho, std::int64_t mu_star, bool auto_mu, double A,
              std::int64_t mu_max, std::vector<double> delta,
              bool dump_counts) {
  const json j = load_config(c);
  cfg(j, "out", sub, "--out", c.out_dir);
  cfg(j, "jobs", sub, "--jobs", c.jobs);
  cfg(j, "seed", sub, "--seed", c.seed);
  cfg(j, "input", sub, "--input", in.input_csv);
  cfg(j, "model", sub, "--model", in.model);
  cfg(j, "preset", sub, "--preset", in.preset);
  cfg(j, "n_series", sub, "--n", in.n_series);
  cfg(j, "standardize", sub, "--standardize", in.standardize);
  cfg(j, "pca", sub, "--pca", in.pca);
  cfg(j, "h", sub, "--h", h);
  cfg(j, "rho", sub, "--rho", rho);
  cfg(j, "mu_star", sub, "--mu-star", mu_star);
  cfg(j, "auto", sub, "--auto", auto_mu);
  cfg(j, "A", sub, "--A", A);
  cfg(j, "mu_max", sub, "--mu-max", mu_max);
  cfg(j, "delta", sub, "--delta", delta);

  if (!(h > 0.0)) throw usage_error("morse needs --h > 0");
  if ((mu_star > 0) == auto_mu)
    throw usage_error("give exactly one of --mu-star or --auto");

  const mgstd::Dataset d = load_dataset(in, c);
  const std::vector<double> dl = resolve_delta(delta, d.dim());
  const mgstd::GridSpec grid =
      mgstd::fit_grid(d.dim(), h, dl, mgstd::data_bound(d));
  const mgstd::TransitionCounts tc = mgstd::count_transitions(d, grid);
  if (auto_mu) {
    const mgstd::MuStarSelection sel =
        mgstd::select_mu_star_counts(tc, rho, A, mu_max);
    if (!sel.mu_star) {
      std::cout << "no mu_star up to " << mu_max
                << " brings the size ratio below " << A << '\n';
      return 4;
    }
    mu_star = *sel.mu_star;
    std::cout << "auto mu_star = " << mu_star << '\n';
  }
  const mgstd::Digraph g = mgstd::build_multivalued_map(tc, rho, mu_star);
  const mgstd::MorseDecomposition md = mgstd::morse_decomposition(g);
  const mgstd::MorseGraph mg = mgstd::make_morse_graph(md, grid);

  auto dot = open_out(c, "morse.dot");
  dot << mgstd::export_dot(mg);
  auto mj = open_out(c, "morse.json");
  mj << mgstd::to_json(md) << '\n';
  if (dump_counts) {
    auto nf = open_out(c, "nu.tsv");
    mgstd::export_nu_tsv(tc, nf);
    auto mf = open_out(c, "mu.tsv");
    mgstd::export_mu_tsv(tc, mf);
    auto ef = open_out(c, "edges.tsv");
    mgstd::export_edges_tsv(g, ef);
  }

  std::cout << md.size() << " Morse sets";
  if (md.size() > 0) {
    std::cout << " (sizes";
    for (const auto& s : md.morse_sets) std::cout << ' ' << s.size();
    std::cout << ")";
  }
  std::cout << '\n';
  const auto mins = mgstd::combinatorial_attractors(md);
  std::cout << "attractors:";
  for (std::size_t i : mins) std::cout << ' ' << mgstd::MorseDecomposition::name(i);
  std::cout << '\n';
  return 0;
}

// ------------------------------------------------------------- vectorfield

int run_vectorfield(const CLI::App* sub, CommonOpts& c, InputOpts& in,
                    double h, double rho, std::int64_t mu_star, bool auto_mu,
                    double A, std::int64_t mu_max, double increment,
                    std::string direction, std::string interp,
                    bool full_order, bool archive_shifts) {
  const json j = load_config(c);
  cfg(j, "out", sub, "--out", c.out_dir);
  cfg(j, "jobs", sub, "--jobs", c.jobs);
  cfg(j, "seed", sub, "--seed", c.seed);
  cfg(j, "input", sub, "--input", in.input_csv);
  cfg(j, "model", sub, "--model", in.model);
  cfg(j, "preset", sub, "--preset", in.preset);
  cfg(j, "n_series", sub, "--n", in.n_series);
  cfg(j, "standardize", sub, "--standardize", in.standardize);
  cfg(j, "pca", sub, "--pca", in.pca);
  cfg(j, "h", sub, "--h", h);
  cfg(j, "rho", sub, "--rho", rho);
  cfg(j, "mu_star", sub, "--mu-star", mu_star);
  cfg(j, "auto", sub, "--auto", auto_mu);
  cfg(j, "A", sub, "--A", A);
  cfg(j, "mu_max", sub, "--mu-max", mu_max);
  cfg(j, "increment", sub, "--increment", increment);
  cfg(j, "direction", sub, "--direction", direction);
  cfg(j, "interp", sub, "--interp", interp);
  cfg(j, "full_order", sub, "--full-order", full_order);

  if (!(h > 0.0)) throw usage_error("vectorfield needs --h > 0");
  if ((mu_star > 0) == auto_mu)
    throw usage_error("give exactly one of --mu-star or --auto");

  const mgstd::Dataset d = load_dataset(in, c);
  if (auto_mu) {
    const mgstd::AveragedMuStar avg =
        mgstd::select_mu_star_averaged(d, h, rho, A, increment, mu_max);
    mu_star = avg.mu_star;
    char mean[32];
    std::snprintf(mean, sizeof mean, "%.6g", avg.mean);
    std::cout << "auto mu_star = " << mu_star << " (average " << mean << ")\n";
  }

  mgstd::MgstdOptions opt;
  opt.shift_increment = increment;
  opt.rho = rho;
  opt.mu_star = mu_star;
  opt.direction = parse_direction(direction);
  opt.weighting = parse_interp(interp);
  opt.use_full_order = full_order;
  opt.jobs = c.jobs;
  const mgstd::MgstdResult res = mgstd::run_mgstd(d, h, opt);

  auto f = open_out(c, "vectorfield.tsv");
  mgstd::export_tsv(res.field, f);
  if (archive_shifts) {
    json arch = json::array();
    for (const auto& s : res.shifts) {
      json e;
      e["delta"] = s.delta;
      e["morse_sets"] = s.decomposition.size();
      e["vectors"] = s.vectors.size();
      arch.push_back(std::move(e));
    }
    auto af = open_out(c, "shifts.json");
    af << arch.dump(2) << '\n';
  }
  std::cout << "mu_star = " << mu_star << ", shifts = " << res.shifts.size()
            << ", supported cells = " << res.field.w.size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morse graphs for stochastic time-series data"};
  app.require_subcommand(1);

  CommonOpts c;
  InputOpts in;
  double h = 0.0, rho = 1.1, A = 5.0, increment = 0.01;
  std::int64_t mu_star = 0, mu_max = 100;
  bool auto_mu = false, sweep = false, full_order = false;
  bool dump_counts = false, archive_shifts = false;
  std::vector<double> delta, h_candidates;
  std::string direction = "antiflow", interp = "source-major";

  CLI::App* sim = app.add_subcommand(
      "simulate", "integrate a benchmark SDE and write the dataset CSV");
  add_common(sim, c);
  sim->add_option("--model", in.model, "dw1d | saddle2d");
  sim->add_option("--preset", in.preset, "D1 | D2");
  sim->add_option("--n", in.n_series, "override the preset series count");

  CLI::App* sel = app.add_subcommand(
      "select", "choose mu_star (and optionally h) from the data");
  add_common(sel, c);
  add_input(sel, in);
  sel->add_option("--h", h, "grid cell size");
  sel->add_option("--rho", rho, "superiority parameter (>= 1)");
  sel->add_option("--A", A, "acceptable first/second Morse-set size ratio");
  sel->add_option("--mu-max", mu_max, "largest threshold scanned");
  sel->add_option("--delta", delta, "grid shift per axis")->delimiter(',');
  sel->add_flag("--sweep-delta", sweep, "average mu_star over the shift lattice");
  sel->add_option("--increment", increment, "shift lattice increment");
  sel->add_option("--h-candidates", h_candidates,
                  "candidate cell sizes for the coverage heuristic")
      ->delimiter(',');

  CLI::App* mor = app.add_subcommand(
      "morse", "Morse decomposition at one (h, rho, mu_star, delta)");
  add_common(mor, c);
  add_input(mor, in);
  mor->add_option("--h", h, "grid cell size");
  mor->add_option("--rho", rho, "superiority parameter (>= 1)");
  mor->add_option("--mu-star", mu_star, "transition count threshold");
  mor->add_flag("--auto", auto_mu, "select mu_star automatically");
  mor->add_option("--A", A, "size-ratio bound for --auto");
  mor->add_option("--mu-max", mu_max, "largest threshold scanned by --auto");
  mor->add_option("--delta", delta, "grid shift per axis")->delimiter(',');
  mor->add_flag("--dump-counts", dump_counts, "also write nu/mu/edge TSVs");

  CLI::App* vf = app.add_subcommand(
      "vectorfield", "averaged transition vector field over the shift sweep");
  add_common(vf, c);
  add_input(vf, in);
  vf->add_option("--h", h, "grid cell size");
  vf->add_option("--rho", rho, "superiority parameter (>= 1)");
  vf->add_option("--mu-star", mu_star, "transition count threshold");
  vf->add_flag("--auto", auto_mu, "select mu_star automatically (sweep average)");
  vf->add_option("--A", A, "size-ratio bound for --auto");
  vf->add_option("--mu-max", mu_max, "largest threshold scanned by --auto");
  vf->add_option("--increment", increment, "shift lattice increment");
  vf->add_option("--direction", direction,
                 "arrow sign: antiflow (parallel to p_i - p_j) | flow");
  vf->add_option("--interp", interp,
                 "arrow center weighting: source-major | target-major");
  vf->add_flag("--full-order", full_order,
               "draw arrows for the full order, not just the reduction");
  vf->add_flag("--archive-shifts", archive_shifts,
               "write a per-shift summary JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return run_simulate(sim, c, in);
    if (sel->parsed())
      return run_select(sel, c, in, h, rho, A, mu_max, delta, sweep, increment,
                        h_candidates);
    if (mor->parsed())
      return run_morse(mor, c, in, h, rho, mu_star, auto_mu, A, mu_max, delta,
                       dump_counts);
    if (vf->parsed())
      return run_vectorfield(vf, c, in, h, rho, mu_star, auto_mu, A, mu_max,
                             increment, direction, interp, full_order,
                             archive_shifts);
    return 2;
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const mgstd::data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const mgstd::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
