// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here and nowhere else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eddy/eddy.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace eddy;

namespace {

// Pinned tolerances.
constexpr double td_equivalence_tol = 1e-8;
constexpr double orthogonality_tol = 1e-10;
constexpr double tau_rescale_tol = 1e-12;
constexpr double v_invariance_tol = 1e-10;
constexpr double be_ratio_lo = 1.8, be_ratio_hi = 2.2;
constexpr double tr_ratio_lo = 3.5, tr_ratio_hi = 4.5;
constexpr double fd_mag_tol = 5e-3;    // relative
constexpr double fd_phase_tol = 0.5;   // degrees
constexpr double env_max_lo = 46, env_max_hi = 50;
constexpr double env_min_lo = -45, env_min_hi = -41;
constexpr double td1_slope_min = 1.6;
constexpr double td2_slope_max = 1.4;
constexpr double control_tol = 1e-12;  // T
constexpr double linearity_tol = 1e-6;

struct Report {
  std::ostringstream detail;
  bool pass = true;

  void check(bool ok, const std::string& what) {
    detail << "    " << (ok ? "ok   " : "FAIL ") << what << "\n";
    pass = pass && ok;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

bool run(int id, const char* title, const std::function<void(Report&)>& body) {
  Report r;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.check(false, std::string("exception: ") + e.what());
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %d %s %s (%.1f s)\n%s", id, r.pass ? "PASS" : "FAIL", title, s, r.detail.str().c_str());
  std::fflush(stdout);
  return r.pass;
}

ReducedModel reduce(const LoopNetwork& net) {
  const auto basis = build_current_basis(net);
  return project_model(assemble_branch_matrices(net), basis, electrode_incidence(basis, net));
}

ReducedModel reference_model(double resistivity_scale = 1.0) {
  TubeGeometry g;
  g.resistivity *= resistivity_scale;
  return reduce(generate_tube_grid(g));
}

double max_offdiag_ratio(const SymMatrix& a, const Matrix& v) {
  const std::size_t n = v.cols();
  Matrix av(a.size(), n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vector col = multiply(a, v.column(k));
    for (std::size_t i = 0; i < a.size(); ++i) av(i, k) = col[i];
  }
  const Matrix g = multiply(v.transposed(), av);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) worst = std::max(worst, std::abs(g(i, j)) / std::sqrt(g(i, i) * g(j, j)));
  return worst;
}

// ---- 1 ---------------------------------------------------------------------

void td_equivalence(Report& r) {
  const auto rm = reference_model();
  const auto mb = generalized_eig(rm.inductance, rm.resistance);
  const auto drive = default_experiment().drive();
  TransientConfig cfg;
  cfg.theta = 1.0;
  cfg.dt = 1.0 / 30000.0;
  cfg.t_end = 10000 * cfg.dt;
  cfg.method = Method::td1;
  const auto a = run_transient(rm, nullptr, nullptr, drive, cfg);
  cfg.method = Method::td2;
  const auto b = run_transient(rm, &mb, nullptr, drive, cfg);
  r.check(a.steps == 10000 && b.steps == 10000, "10000 steps on N0 = " + std::to_string(rm.n_internal()));
  double worst = 0.0;
  bool zero_ok = true;
  for (std::size_t k = 0; k < a.internal_states.size(); ++k) {
    const auto& x = a.internal_states[k];
    const auto& y = b.internal_states[k];
    Vector d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
    const double nx = norm2(x);
    if (nx == 0.0)
      zero_ok = zero_ok && norm2(d) == 0.0;
    else
      worst = std::max(worst, norm2(d) / nx);
  }
  r.check(zero_ok, "zero states agree exactly");
  r.check(worst < td_equivalence_tol, "max relative L2 difference " + fmt(worst) + " < " + fmt(td_equivalence_tol));
}

// ---- 2 ---------------------------------------------------------------------

void modal_properties(Report& r) {
  const auto rm = reference_model();
  const auto mb = generalized_eig(rm.inductance, rm.resistance);
  const double lo = max_offdiag_ratio(rm.inductance, mb.vectors);
  const double ro = max_offdiag_ratio(rm.resistance, mb.vectors);
  r.check(lo < orthogonality_tol, "VᵀLV off-diagonal ratio " + fmt(lo));
  r.check(ro < orthogonality_tol, "VᵀRV off-diagonal ratio " + fmt(ro));
  bool positive = true, descending = true;
  for (std::size_t n = 0; n < mb.size(); ++n) {
    positive = positive && mb.tau[n] > 0.0;
    if (n > 0) descending = descending && mb.tau[n] <= mb.tau[n - 1];
  }
  r.check(positive, "all τ > 0 (τ1 = " + fmt(mb.tau.front()) + " s, τN = " + fmt(mb.tau.back()) + " s)");
  r.check(descending, "τ descending");

  const auto rm2 = reference_model(2.0);
  const auto mb2 = generalized_eig(rm2.inductance, rm2.resistance);
  double tau_err = 0.0, v_err = 0.0;
  for (std::size_t n = 0; n < mb.size(); ++n) {
    tau_err = std::max(tau_err, std::abs(mb2.tau[n] - 0.5 * mb.tau[n]) / (0.5 * mb.tau[n]));
    Vector a = mb.vectors.column(n), b = mb2.vectors.column(n);
    const double na = norm2(a), nb = norm2(b);
    double plus = 0.0, minus = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      plus = std::max(plus, std::abs(a[i] / na - b[i] / nb));
      minus = std::max(minus, std::abs(a[i] / na + b[i] / nb));
    }
    v_err = std::max(v_err, std::min(plus, minus));
  }
  r.check(tau_err < tau_rescale_tol, "doubled resistivity halves τ, max rel error " + fmt(tau_err));
  r.check(v_err < v_invariance_tol, "unit-normalized V unchanged up to sign, max diff " + fmt(v_err));
}

// ---- 3 ---------------------------------------------------------------------

ReducedModel scalar_model(double l, double r) {
  ReducedModel rm;
  rm.inductance = SymMatrix::diagonal(Vector{l});
  rm.resistance = SymMatrix::diagonal(Vector{r});
  rm.drive_resistance = Matrix(1, 0);
  rm.drive_inductance = Matrix(1, 0);
  rm.coil_mutual = Matrix(1, 0);
  rm.lift = Matrix(1, 0);
  rm.n_coordinates = 1;
  rm.kernel = {{{0, 1}}};
  return rm;
}

double decay_error(double theta, double dt) {
  const auto rm = scalar_model(1.0, 1.0);
  const Td1Stepper s(rm, dt, theta);
  Vector state{1.0};
  const auto steps = static_cast<int>(std::lround(1.0 / dt));
  for (int k = 0; k < steps; ++k) s.step(state, Vector{}, Vector{}, {});
  return std::abs(state[0] - std::exp(-1.0));
}

void convergence(Report& r) {
  const double be = decay_error(1.0, 0.01) / decay_error(1.0, 0.005);
  const double tr = decay_error(0.5, 0.01) / decay_error(0.5, 0.005);
  r.check(be >= be_ratio_lo && be <= be_ratio_hi, "θ=1 error ratio " + fmt(be));
  r.check(tr >= tr_ratio_lo && tr <= tr_ratio_hi, "θ=0.5 error ratio " + fmt(tr));

  std::mt19937_64 rng(19);
  ReducedModel rm;
  rm.inductance = test::random_spd(10, rng);
  rm.resistance = test::random_spd(10, rng);
  rm.drive_resistance = Matrix(10, 1);
  rm.drive_inductance = Matrix(10, 1);
  const Vector rd = test::random_vector(10, rng), ld = test::random_vector(10, rng);
  for (std::size_t i = 0; i < 10; ++i) {
    rm.drive_resistance(i, 0) = rd[i];
    rm.drive_inductance(i, 0) = ld[i];
  }
  rm.coil_mutual = Matrix(10, 0);
  const auto mb = generalized_eig(rm.inductance, rm.resistance);
  DriveSignal drive;
  drive.tones = {{1.0, 0.5, 0.2}};
  drive.port_weights = {1.0};

  auto error_at = [&](int steps) {
    const double dt = 1.0 / steps;
    const Td2Stepper s(mb, rm, dt, 0.5);
    Vector a(10, 0.0);
    for (int k = 0; k < steps; ++k) {
      const double i0 = eval_drive(drive, k * dt), i1 = eval_drive(drive, (k + 1) * dt);
      s.step(a, Vector{i0}, Vector{i1 - i0}, {});
    }
    const int fine = 64 * steps;
    std::vector<double> tf;
    std::vector<Vector> pf;
    for (int k = 0; k <= fine; ++k) {
      tf.push_back(k * (1.0 / fine));
      pf.push_back({eval_drive(drive, tf.back())});
    }
    const auto ref = exact_modal_reference(mb, rm, tf, pf, {}, Vector(10, 0.0));
    Vector d(10);
    for (std::size_t n = 0; n < 10; ++n) d[n] = a[n] - ref.back()[n];
    return norm2(d);
  };
  const double e1 = error_at(50), e2 = error_at(100), e3 = error_at(200);
  r.check(e1 / e2 >= tr_ratio_lo && e1 / e2 <= tr_ratio_hi, "10-mode TD2 θ=0.5 ratio 50→100 steps " + fmt(e1 / e2));
  r.check(e2 / e3 >= tr_ratio_lo && e2 / e3 <= tr_ratio_hi, "10-mode TD2 θ=0.5 ratio 100→200 steps " + fmt(e2 / e3));
}

// ---- 4 ---------------------------------------------------------------------

void fd_vs_td(Report& r) {
  auto spec = default_experiment();
  spec.tones = {{4.0, 50.0, 0.0}};
  spec.defects.clear();
  spec.settle_multiple = 5.0;
  spec.window = 1.0;
  spec.method = Solver::td2;
  const auto td = simulate_configuration(spec, std::nullopt);
  spec.method = Solver::fd;
  const auto fd = simulate_configuration(spec, std::nullopt);
  double mag = 0.0, phase = 0.0;
  for (std::size_t p = 0; p < td.phasors.probe_count; ++p) {
    const Complex a = td.phasors.at(p, 0), b = fd.phasors.at(p, 0);
    mag = std::max(mag, std::abs(std::abs(a) - std::abs(b)) / std::abs(b));
    phase = std::max(phase, std::abs(std::arg(a / b)) * 180.0 / std::numbers::pi);
  }
  r.check(td.phasors.probe_count == 25, std::to_string(td.phasors.probe_count) + " probes, τ1 = " + fmt(td.tau1) + " s");
  r.check(mag < fd_mag_tol, "max relative magnitude difference " + fmt(mag));
  r.check(phase < fd_phase_tol, "max phase difference " + fmt(phase) + " deg");
}

// ---- 5 ---------------------------------------------------------------------

void envelope(Report& r) {
  const auto tones = default_experiment().tones;
  const auto st = waveform_stats(tones, 1.0, 30000.0);
  r.check(st.max >= env_max_lo && st.max <= env_max_hi, "max " + fmt(st.max) + " A");
  r.check(st.min >= env_min_lo && st.min <= env_min_hi, "min " + fmt(st.min) + " A");
}

// ---- 6 ---------------------------------------------------------------------

void electrode_flux(Report& r) {
  const std::vector<std::pair<std::size_t, std::size_t>> grids{{2, 4}, {3, 5}, {4, 8}, {6, 12}, {12, 24}, {9, 31}};
  for (const auto& [na, nc] : grids)
    for (const auto& es : {ElectrodeSpec::single_pair(), ElectrodeSpec::opposite_pairs()}) {
      TubeGeometry g;
      g.n_axial = na;
      g.n_circumferential = nc;
      const auto net = generate_tube_grid(g, es);
      const auto basis = build_current_basis(net);
      const auto e = electrode_incidence(basis, net);
      const std::size_t ne = net.electrodes.size();
      bool sums = true;
      for (std::size_t j = 0; j < e.full.cols; ++j) {
        std::int64_t s = 0;
        for (std::size_t k = 0; k < ne; ++k) s += e.full(k, j);
        sums = sums && s == 0;
      }
      const std::size_t rank = integer_rank(e.full);
      const std::size_t n0 = integer_kernel(e.reduced).size();
      const std::size_t nx = basis.size();
      std::ostringstream os;
      os << na << "x" << nc << " Ne=" << ne << ": zero sums, rank " << rank << ", N_X " << nx << ", N0 " << n0;
      r.check(sums && rank == ne - 1 && n0 == nx - (ne - 1) && n0 == basis.n_cycles, os.str());
    }
}

// ---- 7 ---------------------------------------------------------------------

std::vector<BenchRow> bench_rows;

void cost_scaling(Report& r) {
  std::vector<double> n, t1, t2;
  for (std::size_t target : {125u, 250u, 500u, 1000u}) {
    bench_rows.push_back(bench_point(target, 2000, 3));
    const auto& b = bench_rows.back();
    n.push_back(static_cast<double>(b.n_internal));
    t1.push_back(b.td1_per_step_s);
    t2.push_back(b.td2_per_step_s);
    r.check(true, "N0 " + std::to_string(b.n_internal) + ": TD1 " + fmt(b.td1_per_step_s) + " s/step, TD2 " +
                      fmt(b.td2_per_step_s) + " s/step, TD2 setup " + fmt(b.td2_setup_s) + " s");
  }
  const double s1 = loglog_slope(n, t1), s2 = loglog_slope(n, t2);
  r.check(s1 > td1_slope_min, "TD1 slope " + fmt(s1) + " > " + fmt(td1_slope_min));
  r.check(s2 < td2_slope_max, "TD2 slope " + fmt(s2) + " < " + fmt(td2_slope_max));
  r.check(t2.back() < t1.back(), "TD2 faster than TD1 per step at the largest size");
}

// ---- 8 ---------------------------------------------------------------------

void oracle_suite(Report& r) {
  constexpr double mu0 = 4e-7 * std::numbers::pi;
  {
    const double m = neumann_mutual(Segment{{0, 0, 0}, {1, 0, 0}}, Segment{{0, 0.1, 0}, {1, 0.1, 0}}, 8);
    const double o = oracle::parallel_midpoint(1.0, 0.1, 1000);
    r.check(std::abs(m - o) / o < 1e-6, "parallel Neumann vs subdivided midpoint, rel " + fmt(std::abs(m - o) / o));
  }
  {
    const double o = oracle::regularized_self(1.0, 1e-3);
    const double e = std::abs(self_inductance(1.0, 1e-3) - o) / o;
    r.check(e < 0.05, "self inductance vs regularized kernel, rel " + fmt(e));
  }
  {
    LoopNetwork net;
    net.nodes = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    net.branches = {{0, 1, 1e-3, 1e-8, 1e-6}, {1, 2, 1e-3, 1e-8, 1e-6}, {2, 3, 1e-3, 1e-8, 1e-6}, {3, 0, 1e-3, 1e-8, 1e-6}};
    const std::vector<Vec3> probe{{0.5, 0.5, 0.0}};
    const auto b = biot_savart(net, Vector{1, 1, 1, 1}, probe);
    const Vec3 o = oracle::polyline_field({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 0}}, probe[0], 1000);
    const double e = std::abs(b[0].z - o.z) / std::abs(o.z);
    r.check(e < 1e-6, "square-loop field vs 1000-piece Biot-Savart, rel " + fmt(e));
    r.check(std::abs(b[0].z - 2 * std::sqrt(2.0) * mu0 / std::numbers::pi) < 1e-12 * std::abs(b[0].z),
            "square-loop field matches its closed form");
  }
  {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> u(-2, 2);
    IntMatrix e(3, 7);
    do {
      for (auto& v : e.data) v = u(rng);
    } while (integer_rank(e) != 3);
    const Vector id = test::random_vector(3, rng);
    const Vector x = lift_electrode_currents(e, id);
    const Vector o = oracle::min_norm(e, id);
    double diff = test::max_abs_diff(x, o) / norm2(o);
    // Any other solution adds a null-space component and cannot be shorter.
    bool shortest = true;
    for (const auto& col : integer_kernel(e)) {
      Vector y = x;
      for (const auto& s : col) y[s.index] += 0.3 * s.sign;
      shortest = shortest && norm2(y) >= norm2(x);
    }
    r.check(diff < 1e-12 && shortest, "minimum-norm lift vs QR least-squares, rel " + fmt(diff));
  }
  {
    SymMatrix a(2);
    a.lower(0, 0) = 2;
    a.lower(1, 0) = 1;
    a.lower(1, 1) = 2;
    const auto eig = sym_eig(a);
    const auto o = oracle::eig2(2, 1, 2);
    const double e = std::max(std::abs(eig.values[0] - o[0]), std::abs(eig.values[1] - o[1]));
    const double v = std::abs(std::abs(eig.vectors(0, 0)) - std::sqrt(0.5)) + std::abs(eig.vectors(0, 0) - eig.vectors(1, 0)) +
                     std::abs(eig.vectors(0, 1) + eig.vectors(1, 1));
    r.check(e < 1e-14 && v < 1e-14, "2x2 eigenpairs vs characteristic polynomial, err " + fmt(std::max(e, v)));
  }

  // Remaining checks on seeded data.
  std::mt19937_64 rng(2024);
  {
    const auto a = test::random_spd(8, rng);
    const Matrix c = cholesky(a).to_dense();
    const Matrix cct = multiply(c, c.transposed());
    Matrix d = a.to_dense();
    for (std::size_t i = 0; i < 64; ++i) d.data()[i] -= cct.data()[i];
    const double e = frobenius_norm(d) / frobenius_norm(a);
    r.check(e < 1e-13, "Cholesky reconstruction n=8, rel " + fmt(e));
  }
  {
    const auto a = test::random_spd(16, rng);
    const Vector b = test::random_vector(16, rng);
    const Vector x = solve_cholesky(cholesky(a), b);
    Vector res = multiply(a, x);
    for (std::size_t i = 0; i < 16; ++i) res[i] -= b[i];
    r.check(norm2(res) / norm2(b) < 1e-12, "SPD solve n=16 residual " + fmt(norm2(res) / norm2(b)));
  }
  {
    const auto a = test::random_symmetric(12, rng);
    const auto eig = sym_eig(a);
    const Matrix ad = a.to_dense();
    Matrix res = multiply(ad, eig.vectors);
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t k = 0; k < 12; ++k) res(i, k) -= eig.vectors(i, k) * eig.values[k];
    Matrix utu = multiply(eig.vectors.transposed(), eig.vectors);
    for (std::size_t i = 0; i < 12; ++i) utu(i, i) -= 1.0;
    double orth = 0.0;
    for (std::size_t i = 0; i < 144; ++i) orth = std::max(orth, std::abs(utu.data()[i]));
    const double e = frobenius_norm(res) / frobenius_norm(a);
    r.check(e <= 1e-10 && orth < 1e-12, "symmetric eigen n=12 residual " + fmt(e) + ", orthonormality " + fmt(orth));
  }
  {
    const auto l = test::random_spd(10, rng);
    const auto rr = test::random_spd(10, rng);
    const auto mb = generalized_eig(l, rr);
    double res = 0.0;
    for (std::size_t n = 0; n < 10; ++n) {
      const Vector v = mb.vectors.column(n);
      Vector d = multiply(l, v);
      const Vector rv = multiply(rr, v);
      for (std::size_t i = 0; i < 10; ++i) d[i] -= mb.tau[n] * rv[i];
      res += dot(d, d);
    }
    res = std::sqrt(res) / frobenius_norm(l);
    const double lo = max_offdiag_ratio(l, mb.vectors), ro = max_offdiag_ratio(rr, mb.vectors);
    r.check(res <= 1e-9 && lo < 1e-10 && ro < 1e-10, "generalized eigen n=10 residual " + fmt(res));
    const Vector x = test::random_vector(10, rng);
    const Vector back = from_modal(mb, to_modal(mb, x));
    r.check(test::max_abs_diff(back, x) / norm2(x) < 1e-10, "modal round trip");
  }
  {
    const auto tones = default_experiment().tones;
    double worst = 0.0;
    for (double t : {0.0123, 0.25, 0.777}) {
      const double h = 1e-7;
      const double fd = (eval_drive(tones, t + h) - eval_drive(tones, t - h)) / (2 * h);
      const double exact = eval_drive_rate(tones, t);
      worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
    }
    r.check(worst < 1e-5, "drive rate vs central difference, rel " + fmt(worst));
    auto flat = tones;
    for (auto& t : flat) t.phase = 0.0;
    const double cf = waveform_stats(tones, 1.0, 30000.0).crest_factor();
    const double cf0 = waveform_stats(flat, 1.0, 30000.0).crest_factor();
    r.check(cf < cf0, "scheduled phases lower the crest factor " + fmt(cf) + " < " + fmt(cf0));
  }
  {
    Vector x(30000);
    for (std::size_t m = 0; m < x.size(); ++m) x[m] = std::sin(2 * std::numbers::pi * 100.0 * m / 30000.0);
    const double mag = std::abs(dft_phasor(x, 1.0 / 30000.0, 50.0));
    r.check(mag < 1e-9, "100 Hz tone analyzed at 50 Hz, |X| " + fmt(mag));
  }
  {
    bool euler = true;
    for (std::size_t na : {2u, 3u, 7u})
      for (std::size_t nc : {3u, 4u, 11u}) {
        TubeGeometry g;
        g.n_axial = na;
        g.n_circumferential = nc;
        const auto net = generate_tube_grid(g, ElectrodeSpec::none());
        euler = euler && build_current_basis(net).n_cycles == net.branches.size() - net.nodes.size() + 1;
      }
    r.check(euler, "cycle count equals branches - nodes + 1");
  }
  {
    TubeGeometry g;
    g.n_axial = 4;
    g.n_circumferential = 8;
    const auto rm = reduce(generate_tube_grid(g));
    bool spd = true;
    try {
      cholesky(rm.inductance);
      cholesky(rm.resistance);
    } catch (const NumericalError&) {
      spd = false;
    }
    r.check(spd, "4x8 tube: L_b, L_i and R_i certified SPD");
  }
  if (bench_rows.size() == 4) {
    bool mono = true;
    for (std::size_t k = 1; k < bench_rows.size(); ++k)
      mono = mono && bench_rows[k].td1_per_step_s > bench_rows[k - 1].td1_per_step_s &&
             bench_rows[k].td2_per_step_s > bench_rows[k - 1].td2_per_step_s;
    r.check(mono, "bench per-step times increase with size");
  }
}

// ---- 9 ---------------------------------------------------------------------

double max_abs(const ComplexVector& v) {
  double m = 0.0;
  for (auto x : v) m = std::max(m, std::abs(x));
  return m;
}

void signatures(Report& r) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = default_experiment();
  const auto full = run_experiment(spec);
  const double full_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.check(full_s < 600.0, "default experiment (30 tones, 2 defects) in " + fmt(full_s) + " s");

  const double center = 0.5 * std::numbers::pi;
  for (const auto& d : full.defects) {
    const auto& sig = d.signature;
    const std::size_t top = sig.tone_count() - 1;
    const double angle = sig.probe_angles[sig.peak_probe(top)];
    r.check(std::abs(angle - center) <= spec.probes.spacing() + 1e-12,
            d.name + ": peak at " + fmt(angle) + " rad at " + fmt(sig.frequencies[top]) + " Hz, |ΔB| " +
                fmt(std::abs(sig.at(sig.peak_probe(top), top))) + " T");
  }

  auto control = spec;
  control.defects = {{"control", std::nullopt}};
  const double c = max_abs(run_experiment(control).defects[0].signature.values);
  r.check(c < control_tol, "control signature max " + fmt(c) + " T");

  auto doubled = spec;
  for (auto& t : doubled.tones) t.amplitude *= 2.0;
  const auto twice = run_experiment(doubled);
  double worst = 0.0;
  for (std::size_t d = 0; d < full.defects.size(); ++d) {
    const auto& a = full.defects[d].signature.values;
    const auto& b = twice.defects[d].signature.values;
    const double scale = max_abs(a);
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(b[i] - 2.0 * a[i]) / (2.0 * scale));
  }
  r.check(worst < linearity_tol, "doubled amplitudes double the signature, rel " + fmt(worst));
}

}  // namespace

int main() {
  std::printf("eddy %s acceptance, %zu thread(s)\n", version, thread_count());
  bool ok = true;
  ok &= run(1, "TD1/TD2 equivalence on the reference grid", td_equivalence);
  ok &= run(2, "modal basis properties", modal_properties);
  ok &= run(3, "theta-method convergence", convergence);
  ok &= run(4, "FD vs TD2 at 50 Hz", fd_vs_td);
  ok &= run(5, "multisine envelope", envelope);
  ok &= run(6, "electrode flux matrix", electrode_flux);
  ok &= run(7, "cost scaling", cost_scaling);
  ok &= run(8, "oracle suite", oracle_suite);
  ok &= run(9, "crack signatures", signatures);
  std::printf("%s\n", ok ? "ALL PASS" : "SOME CRITERIA FAILED");
  return ok ? 0 : 1;
}
