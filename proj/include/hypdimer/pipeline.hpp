#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "hypdimer/config.hpp"
#include "hypdimer/experiments.hpp"
#include "hypdimer/heights.hpp"
#include "hypdimer/io.hpp"
#include "hypdimer/potential.hpp"
#include "hypdimer/verify.hpp"

namespace hypdimer {

namespace fs = std::filesystem;

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
}

inline std::string variance_file(const FamilySpec& f) {
  return f.family == Family::grid ? "variance_grid.csv" : "variance_pq_" + std::to_string(f.p) + "_" + std::to_string(f.q) + ".csv";
}

inline WeightHook weight_hook(const RunConfig& cfg) {
  return [&cfg](PlanarGraph& g) { apply_weights(g, cfg.weights, cfg.seed); };
}

// Central vertex of a family's ambient graph: the middle of the grid, or the
// first vertex of the root face of a {p,q} patch.
inline int center_vertex(const FamilySpec& f, const PlanarGraph& g, int radius) {
  if (f.family == Family::grid) return (radius / 2) * (radius + 1) + radius / 2;
  return g.face_vertices(g.root_face).front();
}

inline VerifyReport verify_to_disk(const RunConfig& cfg) {
  auto rep = run_verify(cfg);
  ensure_dir(cfg.out);
  write_text((fs::path(cfg.out) / "verify.json").string(), rep.to_json().dump(2) + "\n");
  return rep;
}

// Runs the configured experiments and writes their tables; returns the summary
// that also lands in experiment.json.
inline nlohmann::json run_experiments(const RunConfig& cfg) {
  const auto prov = make_provenance(cfg.identity_json());
  ensure_dir(cfg.out);
  auto path = [&](const std::string& name) { return (fs::path(cfg.out) / name).string(); };
  auto has = [&](const char* e) { return std::find(cfg.experiments.begin(), cfg.experiments.end(), e) != cfg.experiments.end(); };
  nlohmann::json summary = prov.to_json();
  summary["artifacts"] = nlohmann::json::array();

  if (has("variance")) {
    summary["variance"] = nlohmann::json::array();
    for (const auto& f : cfg.families) {
      VarianceConfig vc;
      vc.family = f.family;
      vc.p = f.p;
      vc.q = f.q;
      vc.radii = f.radii;
      vc.samples = cfg.samples;
      vc.seed = cfg.seed;
      vc.jobs = cfg.jobs;
      vc.exact = cfg.exact_variance;
      vc.boundary = cfg.boundary;
      vc.weights = weight_hook(cfg);
      auto t = variance_experiment(vc);
      write_text(path(variance_file(f)), prov.csv_comment() + t.csv());
      summary["artifacts"].push_back(variance_file(f));
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : t.rows) {
        nlohmann::json row{{"radius", r.radius}, {"n", r.n},           {"mean", r.mean},
                           {"var", r.variance},  {"stderr", r.stderr_var}, {"whites", r.whites}};
        if (cfg.exact_variance) row["exact_var"] = r.exact;
        rows.push_back(row);
      }
      summary["variance"].push_back({{"family", f.name()},
                                     {"rows", rows},
                                     {"slope", t.slope},
                                     {"slope_stderr", t.slope_stderr},
                                     {"warnings", t.warnings}});
    }
  }

  if (has("green_decay")) {
    std::ostringstream csv;
    csv.precision(12);
    csv << prov.csv_comment() << "family,radius,distance,shell_mean_log_green,slope_fit,r_squared\n";
    summary["green_decay"] = nlohmann::json::array();
    for (const auto& f : cfg.families) {
      const int radius = f.radii.back();
      PlanarGraph g = f.family == Family::grid ? square_grid(radius) : build_pq_tiling(f.p, f.q, radius);
      apply_weights(g, cfg.weights, cfg.seed);
      auto rep = green_decay_check(g, f.family == Family::grid ? 4 : f.q, center_vertex(f, g, radius));
      for (std::size_t d = 0; d < rep.shell_mean_log.size(); ++d)
        csv << f.name() << ',' << radius << ',' << d << ',' << rep.shell_mean_log[d] << ',' << rep.slope << ','
            << rep.r_squared << '\n';
      summary["green_decay"].push_back({{"family", f.name()},
                                        {"radius", radius},
                                        {"slope", rep.slope},
                                        {"r_squared", rep.r_squared},
                                        {"bound_violation", rep.bound_violation}});
    }
    write_text(path("green_decay.csv"), csv.str());
    summary["artifacts"].push_back("green_decay.csv");
  }

  if (has("correlation")) {
    std::ostringstream csv;
    csv.precision(12);
    csv << prov.csv_comment() << "family,radius,separation,events,max_cov,mean_cov\n";
    summary["correlation"] = nlohmann::json::array();
    for (const auto& f : cfg.families) {
      const int radius = f.radii.back();
      auto ex = experiment_region(f.family, f.p, f.q, radius, cfg.boundary, weight_hook(cfg));
      auto rows = correlation_scan(ex.region, center_anchor(ex.region));
      bool monotone = true;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        csv << f.name() << ',' << radius << ',' << rows[i].separation << ',' << rows[i].events << ','
            << rows[i].max_covariance << ',' << rows[i].mean_covariance << '\n';
        if (i > 0 && rows[i].max_covariance > rows[i - 1].max_covariance) monotone = false;
      }
      summary["correlation"].push_back({{"family", f.name()}, {"radius", radius}, {"monotone", monotone}});
    }
    write_text(path("correlation.csv"), csv.str());
    summary["artifacts"].push_back("correlation.csv");
  }

  write_text(path("experiment.json"), summary.dump(2) + "\n");
  return summary;
}

struct RenderCounts {
  int primal_circles = 0;
  int dual_circles = 0;
  int loops = 0;
};

// Draws the packing, superposition and double-dimer loops of one family.
inline RenderCounts render_to_disk(const RunConfig& cfg) {
  const auto prov = make_provenance(cfg.identity_json());
  const auto& f = cfg.families.at(cfg.render.family);
  const int radius = cfg.render.radius >= 0 ? cfg.render.radius : f.radii.front();
  auto ex = experiment_region(f.family, f.p, f.q, radius, cfg.boundary, weight_hook(cfg));
  const auto& g = ex.sg->base();
  ensure_dir(cfg.out);
  auto path = [&](const std::string& name) { return (fs::path(cfg.out) / name).string(); };

  RenderCounts counts;
  counts.primal_circles = g.num_vertices;
  counts.dual_circles = g.num_faces() - 1;
  write_text(path("packing.svg"), render_packing(g, ex.packing, prov));
  write_text(path("superposition.svg"), render_superposition(ex.region, ex.packing, prov));

  MatchingSampler sampler(ex.region);
  Rng a = make_rng(cfg.seed, "render/first");
  Rng b = make_rng(cfg.seed, cfg.render.equal_pair ? "render/first" : "render/second");
  auto m1 = sampler.sample(a);
  auto m2 = sampler.sample(b);
  auto d = cycle_decomposition(m1, m2);
  counts.loops = static_cast<int>(d.components.size());
  write_text(path("loops.svg"), render_loops(ex.region, ex.packing, d, prov));
  return counts;
}

}  // namespace hypdimer
