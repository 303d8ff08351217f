// tapfe: command-line front end for instance generation, solvers, complexity
// sweeps, spectral computations and the acceptance suite.
//
// Exit codes: 0 success, 1 solver did not converge (outputs still written and
// flagged), 2 bad parameters.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tapfe/acceptance.hpp"
#include "tapfe/complexity.hpp"
#include "tapfe/io.hpp"
#include "tapfe/kernels.hpp"
#include "tapfe/model.hpp"
#include "tapfe/solvers.hpp"
#include "tapfe/spectral.hpp"

namespace fs = std::filesystem;
using namespace tapfe;
using io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotConverged = 1;
constexpr int kExitBadParams = 2;

struct Common {
  std::uint64_t seed = 1;
  int quad_order = 0;
  double tol = 1e-10;
  int jobs = 1;
  std::string out;
};

fs::path out_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("TAPFE_OUT_DIR")) return env;
  return "tapfe_out";
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "64-bit seed")->capture_default_str();
  sub->add_option("--quad-order", c.quad_order,
                  "Gauss-Hermite order for Gaussian integrals, 0 = composite default")
      ->check(CLI::Range(0, 512))
      ->capture_default_str();
  sub->add_option("--tol", c.tol, "solver tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--jobs", c.jobs, "worker threads across seeds / grid points")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  sub->add_option("--out", c.out, "output directory (default $TAPFE_OUT_DIR or ./tapfe_out)");
}

// Instance either read from --instance or generated from (n, lambda, seed).
struct InstanceSource {
  std::string file;
  std::size_t n = 200;
  double lambda = 2.0;
};

void add_instance(CLI::App* sub, InstanceSource& src) {
  sub->add_option("--instance", src.file, "instance file written by `generate`");
  sub->add_option("--n", src.n, "dimension when generating")
      ->check(CLI::Range(std::size_t(1), std::size_t(100000)))
      ->capture_default_str();
  sub->add_option("--lambda", src.lambda, "signal strength when generating")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

Instance load(const InstanceSource& src, std::uint64_t seed) {
  if (!src.file.empty()) return io::read_instance(src.file);
  numerics::RngStream rng(seed, 0);
  return generate(src.n, src.lambda, rng);
}

Json instance_params(const InstanceSource& src, const Instance& inst) {
  Json j;
  if (!src.file.empty()) j["instance"] = src.file;
  j["n"] = inst.n;
  j["lambda"] = inst.lambda;
  return j;
}

Vector column(const Magnetization& m) { return m.m(); }

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

io::Json point_json(const CriticalPoint& p) {
  return {{"value", p.value},         {"q", p.stats.q},
          {"phi", p.stats.phi},       {"a", p.stats.a},
          {"e", p.stats.e},           {"grad_norm", p.grad_norm},
          {"converged", p.converged}, {"hessian_min_eig", p.hessian_min_eig}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TAP free energy, AMP and annealed complexity for Z2 synchronisation"};
  app.require_subcommand(1);
  Common c;
  int code = kExitOk;

  // ---- generate ----------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "draw an instance Y = (lambda/n) x x^T + W");
  std::size_t g_n = 100;
  double g_lambda = 2.0;
  std::uint64_t g_stream = 0;
  gen->add_option("--n", g_n, "dimension")->required()->check(CLI::Range(std::size_t(1), std::size_t(100000)));
  gen->add_option("--lambda", g_lambda, "signal strength")->required()->check(CLI::NonNegativeNumber);
  gen->add_option("--stream", g_stream, "stream id")->capture_default_str();
  gen->add_option("--seed", c.seed, "64-bit seed")->capture_default_str();
  gen->add_option("--out", c.out, "instance file path")->required();
  gen->callback([&] {
    numerics::RngStream rng(c.seed, g_stream);
    const Instance inst = generate(g_n, g_lambda, rng);
    const fs::path path = c.out;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    io::write_instance(path, inst);
    io::Manifest man{"generate", {{"n", g_n}, {"lambda", g_lambda}, {"stream", g_stream}}, c.seed, {path}};
    man.finish(path.has_parent_path() ? path.parent_path() : fs::path("."));
    std::cout << "wrote " << path.string() << " (n=" << g_n << ", lambda=" << g_lambda << ")\n";
  });

  // ---- bayes-exact -------------------------------------------------------
  auto* bayes = app.add_subcommand("bayes-exact", "exact posterior by enumeration (n <= 22)");
  InstanceSource b_src;
  b_src.n = 12;
  add_instance(bayes, b_src);
  add_common(bayes, c);
  bayes->callback([&] {
    const Instance inst = load(b_src, c.seed);
    const PosteriorSummary post = exact_posterior(inst);
    const fs::path dir = out_dir(c);
    fs::create_directories(dir);
    std::vector<Vector> cols(inst.n, Vector(inst.n));
    std::vector<std::string> header;
    for (std::size_t j = 0; j < inst.n; ++j) {
      header.push_back("col" + std::to_string(j));
      for (std::size_t i = 0; i < inst.n; ++i) cols[j][i] = post.X_bayes(i, j);
    }
    io::write_csv(dir / "x_bayes.csv", header, cols);
    Json s = {{"log_partition", post.log_partition},
              {"conditional_mmse", conditional_mmse(post)},
              {"matrix_mse", matrix_mse(post.X_bayes, inst)}};
    io::write_json(dir / "summary.json", s);
    io::Manifest{"bayes-exact", instance_params(b_src, inst), c.seed,
                 {dir / "x_bayes.csv", dir / "summary.json"}}
        .finish(dir);
    print_json(s);
  });

  // ---- amp ---------------------------------------------------------------
  auto* amp = app.add_subcommand("amp", "AMP with spectral initialisation");
  InstanceSource a_src;
  int a_iters = 50;
  std::optional<double> a_c0;
  add_instance(amp, a_src);
  add_common(amp, c);
  amp->add_option("--iters", a_iters, "maximum iterations")->check(CLI::Range(1, 100000))->capture_default_str();
  amp->add_option("--c0", a_c0, "initial scale (default lambda sqrt(1 - lambda^-2))");
  amp->callback([&] {
    const Instance inst = load(a_src, c.seed);
    numerics::RngStream rng(c.seed, 1);
    const AmpResult res = amp_solve(inst, a_iters, rng, a_c0, c.tol);
    const fs::path dir = out_dir(c);
    fs::create_directories(dir);
    io::write_trace(dir / "trace.csv", res.trace);
    io::write_csv(dir / "m.csv", {"m"}, {column(res.m)});
    const double overlap = kernels::dot(res.m.m(), inst.x) / double(inst.n);
    Json s = {{"iterations", res.iterations},
              {"stopped_early", res.stopped_early},
              {"overlap", overlap},
              {"q", res.m.q()},
              {"matrix_mse", matrix_mse_rank1(res.m.m(), inst)}};
    io::write_json(dir / "summary.json", s);
    Json params = instance_params(a_src, inst);
    params["iters"] = a_iters;
    io::Manifest{"amp", params, c.seed, {dir / "trace.csv", dir / "m.csv", dir / "summary.json"}}
        .finish(dir);
    print_json(s);
  });

  // ---- tap-min -----------------------------------------------------------
  auto* tapmin = app.add_subcommand("tap-min", "AMP followed by TAP minimisation");
  InstanceSource t_src;
  std::optional<double> t_beta;
  add_instance(tapmin, t_src);
  add_common(tapmin, c);
  tapmin->add_option("--beta", t_beta, "inverse temperature (default lambda)");
  tapmin->callback([&] {
    const Instance inst = load(t_src, c.seed);
    numerics::RngStream rng(c.seed, 1);
    const AmpResult init = amp_solve(inst, 50, rng);
    const double beta = t_beta.value_or(inst.lambda > 0.0 ? inst.lambda : 1.0);
    const TapContext ctx(beta, inst.lambda, inst.Y);
    TapMinimizeOptions opt;
    opt.tol = c.tol;
    opt.hessian_eig = inst.n <= 2000;
    const TapMinimizeResult res = tap_minimize(ctx, inst.x, init.m, opt);
    const fs::path dir = out_dir(c);
    fs::create_directories(dir);
    io::write_trace(dir / "trace.csv", res.trace);
    io::write_csv(dir / "m.csv", {"m"}, {column(res.point.m)});
    Json s = point_json(res.point);
    s["beta"] = beta;
    s["matrix_mse"] = matrix_mse_rank1(res.point.m.m(), inst);
    io::write_json(dir / "summary.json", s);
    Json params = instance_params(t_src, inst);
    params["beta"] = beta;
    params["tol"] = c.tol;
    io::Manifest{"tap-min", params, c.seed, {dir / "trace.csv", dir / "m.csv", dir / "summary.json"}}
        .finish(dir);
    print_json(s);
    if (!res.converged) code = kExitNotConverged;
  });

  // ---- mf-solve ----------------------------------------------------------
  auto* mf = app.add_subcommand("mf-solve", "naive mean-field iteration from the AMP output");
  InstanceSource m_src;
  double m_damping = 0.5;
  add_instance(mf, m_src);
  add_common(mf, c);
  mf->add_option("--damping", m_damping, "damping in [0, 1)")->check(CLI::Range(0.0, 0.999))->capture_default_str();
  mf->callback([&] {
    const Instance inst = load(m_src, c.seed);
    numerics::RngStream rng(c.seed, 1);
    const AmpResult init = amp_solve(inst, 50, rng);
    const double beta = inst.lambda > 0.0 ? inst.lambda : 1.0;
    const TapContext ctx(beta, inst.lambda, inst.Y);
    const MfResult res = mf_solve(ctx, inst.x, init.m, m_damping, std::max(c.tol, 1e-14));
    const fs::path dir = out_dir(c);
    fs::create_directories(dir);
    io::write_trace(dir / "trace.csv", res.trace);
    io::write_csv(dir / "m.csv", {"m"}, {column(res.m)});
    Json s = {{"residual", res.residual},
              {"converged", res.converged},
              {"cycling", res.cycling},
              {"mf_value", mf_value(ctx, res.m)},
              {"overlap", kernels::dot(res.m.m(), inst.x) / double(inst.n)},
              {"matrix_mse", matrix_mse_rank1(res.m.m(), inst)}};
    io::write_json(dir / "summary.json", s);
    io::Manifest{"mf-solve", instance_params(m_src, inst), c.seed,
                 {dir / "trace.csv", dir / "m.csv", dir / "summary.json"}}
        .finish(dir);
    print_json(s);
    if (!res.converged) code = kExitNotConverged;
  });

  // ---- crit-enum ---------------------------------------------------------
  auto* crit = app.add_subcommand("crit-enum", "multistart enumeration of TAP critical points");
  InstanceSource c_src;
  c_src.n = 50;
  std::optional<double> c_beta;
  int c_restarts = 100;
  add_instance(crit, c_src);
  add_common(crit, c);
  crit->add_option("--beta", c_beta, "inverse temperature (default lambda, or 1.5 at lambda = 0)");
  crit->add_option("--restarts", c_restarts, "random starts")->check(CLI::Range(0, 1000000))->capture_default_str();
  crit->callback([&] {
    const Instance inst = load(c_src, c.seed);
    const double beta = c_beta.value_or(inst.lambda > 0.0 ? inst.lambda : 1.5);
    const TapContext ctx(beta, inst.lambda, inst.Y);
    EnumerateOptions eo;
    eo.restarts = c_restarts;
    eo.tol = c.tol;
    numerics::RngStream rng(c.seed, 2);
    const auto pts = enumerate_critical_points(ctx, inst.x, eo, rng);
    const fs::path dir = out_dir(c);
    fs::create_directories(dir);
    Vector value, q, phi, a, e, gn, eig, mult;
    for (const auto& p : pts) {
      value.push_back(p.value);
      q.push_back(p.stats.q);
      phi.push_back(p.stats.phi);
      a.push_back(p.stats.a);
      e.push_back(p.stats.e);
      gn.push_back(p.grad_norm);
      eig.push_back(p.hessian_min_eig);
      mult.push_back(p.multiplicity_hint);
    }
    io::write_csv(dir / "critical_points.csv",
                  {"value", "q", "phi", "a", "e", "grad_norm", "hessian_min_eig", "hits"},
                  {value, q, phi, a, e, gn, eig, mult});
    Json s = {{"beta", beta}, {"count", pts.size()}};
    if (!pts.empty()) s["lowest"] = point_json(pts.front());
    io::write_json(dir / "summary.json", s);
    Json params = instance_params(c_src, inst);
    params["beta"] = beta;
    params["restarts"] = c_restarts;
    io::Manifest{"crit-enum", params, c.seed, {dir / "critical_points.csv", dir / "summary.json"}}
        .finish(dir);
    print_json(s);
  });

  // ---- qstar -------------------------------------------------------------
  auto* qs = app.add_subcommand("qstar", "fixed point q_star(lambda) and the asymptotic MMSE");
  double q_lambda = 2.0;
  qs->add_option("--lambda", q_lambda, "signal strength")->required()->check(CLI::NonNegativeNumber);
  add_common(qs, c);
  qs->callback([&] {
    const StarredQuantities st = solve_q_star(q_lambda, std::max(c.tol, 1e-15), c.quad_order);
    const double mmse = st.q_star == 0.0 ? 1.0 : 1.0 - st.q_star * st.q_star;
    std::printf("q_star=%.12g\nmmse=%.12g\n", st.q_star, mmse);
    if (st.q_star > 0.0)
      std::printf("phi_star=%.12g\na_star=%.12g\ne_star=%.12g\nresidual=%.3e\n", st.phi_star,
                  st.a_star, st.e_star, st.residual);
  });

  // ---- complexity --------------------------------------------------------
  auto* cx = app.add_subcommand("complexity", "annealed complexity S_star");
  ComplexityConfig cc;
  double x_q = 0.5, x_phi = 0.0, x_a = 0.0, x_e = 0.0;
  bool x_star = false, x_surface = false;
  int x_grid = 11;
  double x_qlo = 0.05, x_qhi = 0.95, x_plo = 0.0, x_phi_hi = 0.9, x_alo = 0.0, x_ahi = 20.0;
  cx->add_option("--beta", cc.beta, "inverse temperature")->required()->check(CLI::PositiveNumber);
  cx->add_option("--lambda", cc.lambda, "signal strength")->capture_default_str()->check(CLI::NonNegativeNumber);
  cx->add_option("--q", x_q, "Q")->capture_default_str();
  cx->add_option("--phi", x_phi, "M")->capture_default_str();
  cx->add_option("--a", x_a, "A")->capture_default_str();
  cx->add_option("--e", x_e, "E")->capture_default_str();
  cx->add_flag("--at-star", x_star, "evaluate at (q_star, phi_star, a_star, e_star); needs beta = lambda");
  cx->add_flag("--surface", x_surface, "grid over (q, phi) with (a, e) maximised out");
  cx->add_option("--grid", x_grid, "points per axis for --surface")->check(CLI::Range(2, 1000))->capture_default_str();
  cx->add_option("--q-min", x_qlo)->capture_default_str();
  cx->add_option("--q-max", x_qhi)->capture_default_str();
  cx->add_option("--phi-min", x_plo)->capture_default_str();
  cx->add_option("--phi-max", x_phi_hi)->capture_default_str();
  cx->add_option("--a-min", x_alo)->capture_default_str();
  cx->add_option("--a-max", x_ahi)->capture_default_str();
  add_common(cx, c);
  cx->callback([&] {
    cc.quad_order = c.quad_order;
    cc.tol = c.tol;
    if (x_surface) {
      const std::size_t g = std::size_t(x_grid);
      Vector qs_(g * g), ps(g * g), vs(g * g), as(g * g), es(g * g);
      parallel_for(g * g, c.jobs, [&](std::size_t k) {
        const double q = x_qlo + (x_qhi - x_qlo) * double(k / g) / double(g - 1);
        const double phi = x_plo + (x_phi_hi - x_plo) * double(k % g) / double(g - 1);
        qs_[k] = q;
        ps[k] = phi;
        const OuterMaximum om = maximize_over_ae(q, phi, cc, x_alo, x_ahi);
        vs[k] = om.value;
        as[k] = om.a;
        es[k] = om.e;
      });
      const fs::path dir = out_dir(c);
      fs::create_directories(dir);
      io::write_csv(dir / "surface.csv", {"q", "phi", "a", "e", "s_star"}, {qs_, ps, as, es, vs});
      Json params = {{"beta", cc.beta}, {"lambda", cc.lambda}, {"grid", x_grid},
                     {"q", {x_qlo, x_qhi}}, {"phi", {x_plo, x_phi_hi}}, {"a", {x_alo, x_ahi}}};
      io::Manifest{"complexity", params, c.seed, {dir / "surface.csv"}}.finish(dir);
      std::cout << "wrote " << (dir / "surface.csv").string() << "\n";
      return;
    }
    if (x_star) {
      if (cc.beta != cc.lambda) throw ParameterError("--at-star needs beta = lambda");
      const StarredQuantities st = solve_q_star(cc.lambda, 1e-12, c.quad_order);
      if (st.q_star == 0.0) throw ParameterError("--at-star needs lambda > 1");
      x_q = st.q_star;
      x_phi = st.phi_star;
      x_a = st.a_star;
      x_e = st.e_star;
    }
    const ComplexityPoint p = s_star(x_q, x_phi, x_a, x_e, cc);
    std::printf("q=%.12g phi=%.12g a=%.12g e=%.12g\ns_star=%.6e\nconverged=%d\n", x_q, x_phi, x_a,
                x_e, p.s_star, int(p.converged));
    std::printf("multipliers=%.6e %.6e %.6e %.6e\n", p.multipliers[0], p.multipliers[1],
                p.multipliers[2], p.multipliers[3]);
    if (!p.converged && !p.diverged) code = kExitNotConverged;
  });

  // ---- s0-surface --------------------------------------------------------
  auto* s0 = app.add_subcommand("s0-surface", "reduced complexity S0_star over a (q, Delta) grid");
  double s_beta = 2.0, s_e = -1.0, s_dmax = 0.0;
  int s_grid = 21;
  s0->add_option("--beta", s_beta, "inverse temperature")->required()->check(CLI::PositiveNumber);
  s0->add_option("--e", s_e, "energy level")->required();
  s0->add_option("--delta-max", s_dmax, "|Delta| range (default beta^2/2 + 3 beta)");
  s0->add_option("--grid", s_grid, "points per axis")->check(CLI::Range(2, 1000))->capture_default_str();
  add_common(s0, c);
  s0->callback([&] {
    const double dmax = s_dmax > 0.0 ? s_dmax : 0.5 * s_beta * s_beta + 3.0 * s_beta;
    const std::size_t g = std::size_t(s_grid);
    Vector qv(g * g), dv(g * g), sv(g * g), conv(g * g);
    parallel_for(g * g, c.jobs, [&](std::size_t k) {
      const double q = 0.05 + 0.95 * double(k / g) / double(g - 1);
      const double delta = -dmax + 2.0 * dmax * double(k % g) / double(g - 1);
      qv[k] = q;
      dv[k] = delta;
      const ReducedPoint p = s0_star(q, delta, s_e, s_beta, c.tol, c.quad_order);
      sv[k] = p.s_star;
      conv[k] = p.converged ? 1.0 : 0.0;
    });
    const fs::path dir = out_dir(c);
    fs::create_directories(dir);
    io::write_csv(dir / "s0_surface.csv", {"q", "delta", "s0_star", "converged"}, {qv, dv, sv, conv});
    io::Manifest{"s0-surface", {{"beta", s_beta}, {"e", s_e}, {"delta_max", dmax}, {"grid", s_grid}},
                 c.seed, {dir / "s0_surface.csv"}}
        .finish(dir);
    std::cout << "wrote " << (dir / "s0_surface.csv").string() << "\n";
  });

  // ---- gs-bound ----------------------------------------------------------
  auto* gsb = app.add_subcommand("gs-bound", "1RSB lower bound on the SK ground-state energy");
  double gs_beta = 5.0;
  GroundStateConfig gcfg;
  gsb->add_option("--beta", gs_beta, "inverse temperature")->required()->check(CLI::PositiveNumber);
  gsb->add_option("--q-min", gcfg.q_min, "smallest overlap considered")->capture_default_str();
  gsb->add_option("--grid-q", gcfg.grid_q)->capture_default_str();
  gsb->add_option("--grid-delta", gcfg.grid_delta)->capture_default_str();
  add_common(gsb, c);
  gsb->callback([&] {
    gcfg.quad_order = c.quad_order;
    gcfg.inner_tol = c.tol;
    const GroundStateBound gs = ground_state_bound(gs_beta, gcfg);
    Json s = {{"beta", gs_beta},
              {"f1rsb", gs.f1rsb},
              {"e_threshold", gs.e_threshold},
              {"q", gs.at_threshold.q},
              {"delta", gs.at_threshold.delta},
              {"sup_evaluations", gs.sup_evaluations}};
    const fs::path dir = out_dir(c);
    fs::create_directories(dir);
    io::write_json(dir / "gs_bound.json", s);
    io::Manifest{"gs-bound", {{"beta", gs_beta}, {"q_min", gcfg.q_min}}, c.seed,
                 {dir / "gs_bound.json"}}
        .finish(dir);
    print_json(s);
  });

  // ---- spectrum / hessian-mc share a TAP critical point -------------------
  auto critical_point = [&](const Instance& inst, double beta) {
    numerics::RngStream rng(c.seed, 1);
    const AmpResult init = amp_solve(inst, 50, rng);
    const TapContext ctx(beta, inst.lambda, inst.Y);
    TapMinimizeOptions opt;
    opt.tol = c.tol;
    return tap_minimize(ctx, inst.x, init.m, opt);
  };

  auto* spec = app.add_subcommand("spectrum", "free-convolution density at a TAP critical point");
  InstanceSource p_src;
  p_src.n = 500;
  std::optional<double> p_beta;
  add_instance(spec, p_src);
  add_common(spec, c);
  spec->add_option("--beta", p_beta, "inverse temperature (default lambda)");
  spec->callback([&] {
    const Instance inst = load(p_src, c.seed);
    const double beta = p_beta.value_or(inst.lambda > 0.0 ? inst.lambda : 1.0);
    const TapMinimizeResult tap = critical_point(inst, beta);
    const Vector d = hessian_diagonal(beta, tap.point.m);
    const SpectralMeasure nu = spectral_measure(d, beta);
    const fs::path dir = out_dir(c);
    fs::create_directories(dir);
    io::write_csv(dir / "density.csv", {"x", "density"}, {nu.grid, nu.density});
    Json s = {{"beta", beta},
              {"tap_converged", tap.converged},
              {"q", tap.point.m.q()},
              {"support", {nu.support_lo, nu.support_hi}},
              {"components", nu.components.size()},
              {"mass", nu.mass},
              {"L", onsager_L(beta, tap.point.m)}};
    try {
      const LogPotential lp = log_potential(d, beta, tap.point.m.q());
      s["g0"] = lp.g0;
      s["log_integral"] = lp.log_integral;
    } catch (const DomainError& e) {
      s["g0"] = nullptr;
      s["note"] = e.what();
    }
    io::write_json(dir / "summary.json", s);
    Json params = instance_params(p_src, inst);
    params["beta"] = beta;
    io::Manifest{"spectrum", params, c.seed, {dir / "density.csv", dir / "summary.json"}}.finish(dir);
    print_json(s);
    if (!tap.converged) code = kExitNotConverged;
  });

  auto* hmc = app.add_subcommand("hessian-mc", "samples of the conditional TAP Hessian");
  InstanceSource h_src;
  h_src.n = 500;
  std::optional<double> h_beta;
  int h_draws = 20;
  add_instance(hmc, h_src);
  add_common(hmc, c);
  hmc->add_option("--beta", h_beta, "inverse temperature (default lambda)");
  hmc->add_option("--draws", h_draws, "GOE draws")->check(CLI::Range(1, 100000))->capture_default_str();
  hmc->callback([&] {
    const Instance inst = load(h_src, c.seed);
    const double beta = h_beta.value_or(inst.lambda > 0.0 ? inst.lambda : 1.0);
    const TapMinimizeResult tap = critical_point(inst, beta);
    const Magnetization& m = tap.point.m;
    const TapContext ctx(beta, inst.lambda, inst.Y);
    const Vector d = hessian_diagonal(beta, m);
    const StieltjesSolver solver(d, beta);
    const std::size_t draws = std::size_t(h_draws);
    Vector ks(draws), logdet(draws), lo(draws);
    parallel_for(draws, c.jobs, [&](std::size_t k) {
      numerics::RngStream rng(c.seed, 100 + k);
      const ConditionalHessianSample s = sample_conditional_hessian(ctx, inst.x, m, rng);
      const Vector ev = numerics::symmetric_eigenvalues(s.Z);
      ks[k] = ks_distance(ev, solver.cdf_sorted(ev));
      lo[k] = ev.front();
      logdet[k] = numerics::log_abs_det(s.Z) / double(inst.n);
    });
    const fs::path dir = out_dir(c);
    fs::create_directories(dir);
    io::write_csv(dir / "draws.csv", {"ks", "min_eigenvalue", "logdet_per_n"}, {ks, lo, logdet});
    Json s = {{"beta", beta}, {"tap_converged", tap.converged}, {"L", onsager_L(beta, m)},
              {"draws", h_draws}};
    io::write_json(dir / "summary.json", s);
    Json params = instance_params(h_src, inst);
    params["beta"] = beta;
    params["draws"] = h_draws;
    io::Manifest{"hessian-mc", params, c.seed, {dir / "draws.csv", dir / "summary.json"}}.finish(dir);
    print_json(s);
    if (!tap.converged) code = kExitNotConverged;
  });

  // ---- verify ------------------------------------------------------------
  auto* ver = app.add_subcommand("verify", "run the acceptance suite");
  std::vector<int> v_only;
  ver->add_option("--only", v_only, "criterion ids to run (default all)")->check(CLI::Range(1, kCriterionCount));
  add_common(ver, c);
  ver->get_option("--seed")->default_str(std::to_string(AcceptanceOptions{}.seed));
  ver->callback([&] {
    AcceptanceOptions opt;
    if (ver->count("--seed")) opt.seed = c.seed;
    opt.out_dir = out_dir(c);
    opt.jobs = c.jobs;
    opt.only = v_only;
    opt.on_result = [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; };
    const auto results = run_acceptance(opt);
    int failed = 0;
    for (const auto& r : results) failed += !r.passed;
    std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
    if (failed) code = kExitNotConverged;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitBadParams;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kExitBadParams;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadParams;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadParams;
  } catch (const ConvergenceError& e) {
    std::cerr << "not converged: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const BracketError& e) {
    std::cerr << "not converged: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotConverged;
  }
  return code;
}
