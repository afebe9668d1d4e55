// Command-line front end. Exit codes: 0 success, 1 numerical failure,
// 2 input, I/O or argument error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "eddy/eddy.hpp"

using namespace eddy;

namespace {

struct Common {
  std::uint64_t seed = 0;
};

CsvHeader header(const Common& c, std::vector<std::pair<std::string, std::string>> params) {
  return {c.seed, std::move(params)};
}

// --- gen-tube -------------------------------------------------------------

struct GenTubeArgs {
  TubeGeometry geometry;
  std::string electrodes = "opposite";
  std::optional<double> defect_angle;
  double defect_z = 0.15;
  double defect_width = 0.1;    // rad
  double defect_height = 0.02;  // m
  std::optional<double> defect_factor;
  std::string out;
};

void gen_tube(const GenTubeArgs& a) {
  ElectrodeSpec es;
  if (a.electrodes == "opposite") es = ElectrodeSpec::opposite_pairs();
  else if (a.electrodes == "single") es = ElectrodeSpec::single_pair();
  else if (a.electrodes == "none") es = ElectrodeSpec::none();
  else throw ValidationError("electrodes must be opposite, single or none");
  std::optional<DefectSpec> defect;
  if (a.defect_angle) {
    DefectSpec d;
    d.angle_min = *a.defect_angle - 0.5 * a.defect_width;
    d.angle_max = *a.defect_angle + 0.5 * a.defect_width;
    d.z_min = a.defect_z - 0.5 * a.defect_height;
    d.z_max = a.defect_z + 0.5 * a.defect_height;
    if (a.defect_factor) {
      d.mode = DefectMode::scale_resistivity;
      d.factor = *a.defect_factor;
    }
    defect = d;
  }
  const auto net = generate_tube_grid(a.geometry, es, defect);
  write_file(a.out, serialize_model(net));
  std::printf("nodes %zu\nbranches %zu\nelectrodes %zu\ncycles %zu\n", net.nodes.size(), net.branches.size(),
              net.electrodes.size(), cycle_rank(net));
}

// --- assemble -------------------------------------------------------------

struct AssembleArgs {
  std::string model;
  std::string out;
  int quad_order = NeumannOptions{}.quad_order;
  ProbeRing ring;
  double ring_radius = 0.0;  // 0: no probes
};

void assemble(const AssembleArgs& a) {
  const auto net = load_model(a.model);
  const auto basis = build_current_basis(net);
  const auto e = electrode_incidence(basis, net);
  const auto bm = assemble_branch_matrices(net, a.quad_order);
  const auto rm = project_model(bm, basis, e, assemble_source_mutuals(net, basis, a.quad_order));
  std::optional<ProbeObserver> obs;
  if (a.ring_radius > 0.0) {
    TubeGeometry g;
    g.radius = a.ring_radius;
    ProbeRing r = a.ring;
    r.offset = 0.0;
    obs = azimuthal(make_probe_observer(net, basis, rm, r.positions(g)));
  }
  auto cache = make_cache(rm, obs ? &*obs : nullptr);
  cache.meta["Ne"] = std::to_string(net.electrode_count());
  cache.meta["quad_order"] = std::to_string(a.quad_order);
  write_file(a.out, serialize_cache(cache));
  std::printf("N_X %zu\nN0 %zu\nNe %zu\n", rm.n_coordinates, rm.n_internal(), net.electrode_count());
}

MatrixCache load_cache(const std::string& path) { return parse_cache(read_file(path)); }

// --- modes ----------------------------------------------------------------

double offdiag_ratio(const Matrix& v, const SymMatrix& a) {
  const Matrix g = multiply_transposed(v, multiply(a.to_dense(), v));
  double off = 0.0, diag = INFINITY;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j)
      if (i == j) diag = std::min(diag, std::abs(g(i, i)));
      else off = std::max(off, std::abs(g(i, j)));
  return g.rows() > 0 ? off / diag : 0.0;
}

void modes(const std::string& cache_path, const std::string& out, const Common& c) {
  const auto rm = cache_model(load_cache(cache_path));
  const auto mb = generalized_eig(rm.inductance, rm.resistance);
  std::string csv = header(c, {{"cache", cache_path}}).render() + "mode,tau_s,inductance_h,resistance_ohm\n";
  for (std::size_t n = 0; n < mb.size(); ++n)
    csv += std::to_string(n) + ',' + format_double(mb.tau[n]) + ',' + format_double(mb.inductance[n]) + ',' +
           format_double(mb.resistance[n]) + '\n';
  write_file(out, csv);
  if (mb.size() == 0) {
    std::printf("N0 0\n");
    return;
  }
  std::printf("N0 %zu\ntau_1 %s\ntau_N0 %s\n", mb.size(), format_double(mb.tau.front()).c_str(),
              format_double(mb.tau.back()).c_str());
  std::printf("orthogonality_L %.3e\northogonality_R %.3e\n", offdiag_ratio(mb.vectors, rm.inductance),
              offdiag_ratio(mb.vectors, rm.resistance));
}

// --- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string cache;
  std::string drive;
  std::string method = "td2";
  double theta = 1.0;
  double dt = 1.0 / 30000.0;
  double t_end = 0.0;
  std::size_t stride = 1;
  std::string out;
  std::string timing;
};

void simulate(const SimulateArgs& a, const Common& c) {
  const auto cache = load_cache(a.cache);
  const auto rm = cache_model(cache);
  const auto obs = cache_observer(cache, rm);
  const auto drive = parse_drive(read_file(a.drive));
  TransientConfig cfg;
  cfg.theta = a.theta;
  cfg.dt = a.dt;
  cfg.t_end = a.t_end;
  cfg.method = a.method == "td1" ? Method::td1 : Method::td2;
  cfg.capture_stride = a.stride;
  cfg.capture_states = !obs.has_value();
  cfg.validate();
  std::optional<ModalBasis> mb;
  double eig_s = 0.0;
  if (cfg.method == Method::td2) {
    const auto t0 = std::chrono::steady_clock::now();
    mb = generalized_eig(rm.inductance, rm.resistance);
    eig_s = detail::seconds_since(t0);
  }
  const auto res = run_transient(rm, mb ? &*mb : nullptr, obs ? &*obs : nullptr, drive, cfg);

  const auto params = std::vector<std::pair<std::string, std::string>>{
      {"method", a.method}, {"theta", format_double(a.theta)}, {"dt", format_double(a.dt)}, {"t_end", format_double(a.t_end)}};
  const auto& rows = obs ? res.probe_fields : res.internal_states;
  const std::string prefix = obs ? "B_" : "I_";
  const std::size_t channels = rows.empty() ? 0 : rows.front().size();
  std::string csv = header(c, params).render() + "t_s";
  for (std::size_t k = 0; k < channels; ++k) csv += ',' + prefix + std::to_string(k);
  csv += '\n';
  for (std::size_t s = 0; s < res.times.size(); ++s) {
    csv += format_double(res.times[s]);
    for (double v : rows[s]) csv += ',' + format_double(v);
    csv += '\n';
  }
  write_file(a.out, csv);
  if (!a.timing.empty()) {
    std::string t = header(c, params).render() + "method,n0,steps,setup_s,stepping_s,per_step_s\n";
    t += a.method + ',' + std::to_string(rm.n_internal()) + ',' + std::to_string(res.steps) + ',' +
         format_double(res.wall_time_setup + eig_s) + ',' + format_double(res.wall_time_stepping) + ',' +
         format_double(res.per_step_cost) + '\n';
    write_file(a.timing, t);
  }
  std::printf("steps %zu\nsetup_s %.6f\nstepping_s %.6f\n", res.steps, res.wall_time_setup + eig_s, res.wall_time_stepping);
}

// --- fd -------------------------------------------------------------------

void fd(const std::string& cache_path, const std::string& drive_path, const std::vector<double>& freqs_override,
        const std::string& out, const Common& c) {
  const auto cache = load_cache(cache_path);
  const auto rm = cache_model(cache);
  const auto obs = cache_observer(cache, rm);
  auto drive = parse_drive(read_file(drive_path));
  std::vector<Tone> tones = drive.tones;
  if (!freqs_override.empty()) {
    tones.clear();
    for (double f : freqs_override) {
      if (!(f >= 0.0)) throw ValidationError("frequencies must be non-negative");
      tones.push_back({1.0, f, 0.0});
    }
  }
  std::vector<double> freqs;
  for (const auto& t : tones) freqs.push_back(t.frequency);
  const std::size_t channels = obs ? obs->rows() : rm.n_internal();
  PhasorSet ph(channels, freqs);
  double worst = 0.0;
  for (std::size_t k = 0; k < tones.size(); ++k) {
    const Complex x = std::polar(tones[k].amplitude, tones[k].phase);
    ComplexVector ports, coils;
    for (double w : drive.port_weights) ports.push_back(w * x);
    for (double w : drive.coil_weights) coils.push_back(w * x);
    const auto sol = fd_solve(rm, 2.0 * std::numbers::pi * freqs[k], ports, coils, obs ? &*obs : nullptr);
    worst = std::max(worst, sol.residual);
    const auto& v = obs ? sol.probes : sol.internal;
    for (std::size_t p = 0; p < channels; ++p) ph.at(p, k) = v[p];
  }
  write_file(out, phasor_csv(ph, header(c, {{"cache", cache_path},
                                            {"channels", obs ? "probe_B_phi" : "internal_currents"},
                                            {"tones", std::to_string(tones.size())}})));
  std::printf("tones %zu\nchannels %zu\nmax_residual %.3e\n", tones.size(), channels, worst);
}

// --- signature ------------------------------------------------------------

void signature(const std::string& spec_path, const std::string& out_dir, const std::string& method, const Common& c) {
  auto spec = parse_experiment(read_file(spec_path));
  if (!method.empty()) spec.method = parse_solver(method, 0);
  std::filesystem::create_directories(out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_experiment(spec);
  const auto params = std::vector<std::pair<std::string, std::string>>{
      {"spec", spec_path}, {"method", to_string(spec.method)}, {"theta", format_double(spec.theta)}};
  const auto dir = std::filesystem::path(out_dir);
  write_file((dir / "background_phasors.csv").string(), phasor_csv(r.background.phasors, header(c, params)));
  std::printf("N0 %zu\ntau_1 %s\n", r.background.n_internal, format_double(r.background.tau1).c_str());
  for (const auto& d : r.defects) {
    write_file((dir / (d.name + "_phasors.csv")).string(), phasor_csv(d.run.phasors, header(c, params)));
    write_file((dir / (d.name + "_signature.csv")).string(), signature_csv(d.signature, header(c, params)));
    auto locus_params = params;
    locus_params.push_back({"normalization", "max |dB| over probes per tone"});
    write_file((dir / (d.name + "_locus.csv")).string(), signature_csv(d.signature.normalized(), header(c, locus_params)));
    double peak = 0.0;
    for (auto v : d.signature.values) peak = std::max(peak, std::abs(v));
    const std::size_t top = d.signature.tone_count() - 1;
    const std::size_t p = d.signature.peak_probe(top);
    std::printf("%s max_dB %.6e peak_angle_at_%s_Hz %.6f\n", d.name.c_str(), peak,
                format_double(d.signature.frequencies[top]).c_str(), d.signature.probe_angles[p]);
  }
  std::printf("wall_s %.3f\n", detail::seconds_since(t0));
}

// --- bench ----------------------------------------------------------------

void bench(const std::vector<std::size_t>& sizes, std::size_t steps, std::size_t repeats, const std::string& out,
           const Common& c) {
  std::string csv = header(c, {{"steps", std::to_string(steps)}, {"repeats", std::to_string(repeats)}}).render();
  csv += "n0,n_axial,n_circumferential,assembly_s,td1_setup_s,td1_per_step_s,td2_setup_s,td2_per_step_s,fd_per_tone_s\n";
  std::vector<double> n, td1, td2;
  for (std::size_t target : sizes) {
    const auto r = bench_point(target, steps, repeats);
    csv += std::to_string(r.n_internal) + ',' + std::to_string(r.n_axial) + ',' + std::to_string(r.n_circumferential) +
           ',' + format_double(r.assembly_s) + ',' + format_double(r.td1_setup_s) + ',' +
           format_double(r.td1_per_step_s) + ',' + format_double(r.td2_setup_s) + ',' +
           format_double(r.td2_per_step_s) + ',' + format_double(r.fd_per_tone_s) + '\n';
    std::printf("N0 %zu td1_per_step %.3e td2_per_step %.3e td2_setup %.3f\n", r.n_internal, r.td1_per_step_s,
                r.td2_per_step_s, r.td2_setup_s);
    std::fflush(stdout);
    n.push_back(static_cast<double>(r.n_internal));
    td1.push_back(r.td1_per_step_s);
    td2.push_back(r.td2_per_step_s);
  }
  if (n.size() >= 2) {
    const double s1 = loglog_slope(n, td1), s2 = loglog_slope(n, td2);
    csv += "# slope_td1_per_step " + format_double(s1) + "\n# slope_td2_per_step " + format_double(s2) + '\n';
    std::printf("slope_td1 %.3f\nslope_td2 %.3f\n", s1, s2);
  }
  write_file(out, csv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eddy-current network solver: assembly, modal and time/frequency-domain analysis"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1);
  Common common;
  app.add_option("--seed", common.seed, "Seed echoed into every output header");

  GenTubeArgs gt;
  auto* c_gen = app.add_subcommand("gen-tube", "Write a tube-grid model file");
  c_gen->add_option("--n-axial", gt.geometry.n_axial, "Rings")->capture_default_str();
  c_gen->add_option("--n-circ", gt.geometry.n_circumferential, "Nodes per ring")->capture_default_str();
  c_gen->add_option("--radius", gt.geometry.radius, "Tube radius (m)")->capture_default_str();
  c_gen->add_option("--length", gt.geometry.length, "Tube length (m)")->capture_default_str();
  c_gen->add_option("--wall", gt.geometry.wall_thickness, "Wall thickness (m)")->capture_default_str();
  c_gen->add_option("--resistivity", gt.geometry.resistivity, "Resistivity (ohm m)")->capture_default_str();
  c_gen->add_option("--electrodes", gt.electrodes, "opposite | single | none")->capture_default_str();
  c_gen->add_option("--defect-angle", gt.defect_angle, "Defect center angle (rad)");
  c_gen->add_option("--defect-z", gt.defect_z, "Defect center height (m)")->capture_default_str();
  c_gen->add_option("--defect-width", gt.defect_width, "Defect angular width (rad)")->capture_default_str();
  c_gen->add_option("--defect-height", gt.defect_height, "Defect axial extent (m)")->capture_default_str();
  c_gen->add_option("--defect-factor", gt.defect_factor, "Scale resistivity instead of removing branches");
  c_gen->add_option("-o,--out", gt.out, "Model file")->required();

  std::string spec_out;
  auto* c_spec = app.add_subcommand("default-spec", "Write the default experiment spec");
  c_spec->add_option("-o,--out", spec_out, "Spec file")->required();

  AssembleArgs as;
  auto* c_asm = app.add_subcommand("assemble", "Assemble and reduce a model into a matrix cache");
  c_asm->add_option("model", as.model, "Model file")->required();
  c_asm->add_option("-o,--out", as.out, "Matrix cache")->required();
  c_asm->add_option("--quad-order", as.quad_order, "Gauss-Legendre order")->capture_default_str();
  c_asm->add_option("--probe-radius", as.ring_radius, "Probe ring radius (m); 0 stores no probes")->capture_default_str();
  c_asm->add_option("--probe-count", as.ring.count, "Probes on the ring")->capture_default_str();
  c_asm->add_option("--probe-height", as.ring.height, "Probe ring height (m)")->capture_default_str();
  c_asm->add_option("--probe-span", as.ring.span, "Angular span (rad)")->capture_default_str();
  c_asm->add_option("--probe-center", as.ring.center, "Center angle (rad)")->capture_default_str();

  std::string modes_cache, modes_out;
  auto* c_modes = app.add_subcommand("modes", "Modal time constants of a cached model");
  c_modes->add_option("cache", modes_cache, "Matrix cache")->required();
  c_modes->add_option("-o,--out", modes_out, "Modal CSV")->required();

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Time-domain run from rest");
  c_sim->add_option("cache", sim.cache, "Matrix cache")->required();
  c_sim->add_option("drive", sim.drive, "Drive file")->required();
  c_sim->add_option("--method", sim.method, "td1 | td2")->check(CLI::IsMember({"td1", "td2"}))->capture_default_str();
  c_sim->add_option("--theta", sim.theta, "Theta in [0, 1]")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  c_sim->add_option("--dt", sim.dt, "Step (s)")->check(CLI::PositiveNumber)->capture_default_str();
  c_sim->add_option("--t-end", sim.t_end, "End time (s)")->required()->check(CLI::PositiveNumber);
  c_sim->add_option("--stride", sim.stride, "Keep every n-th sample")->check(CLI::PositiveNumber)->capture_default_str();
  c_sim->add_option("-o,--out", sim.out, "Time-series CSV")->required();
  c_sim->add_option("--timing", sim.timing, "Timing CSV");

  std::string fd_cache, fd_drive, fd_out;
  std::vector<double> fd_freqs;
  auto* c_fd = app.add_subcommand("fd", "Per-tone phasor solve");
  c_fd->add_option("cache", fd_cache, "Matrix cache")->required();
  c_fd->add_option("drive", fd_drive, "Drive file (port weights and tones)")->required();
  c_fd->add_option("--freq", fd_freqs, "Unit-amplitude tones (Hz) replacing the drive's tones; 0 allowed")->delimiter(',');
  c_fd->add_option("-o,--out", fd_out, "Phasor CSV")->required();

  std::string sig_spec, sig_out, sig_method;
  auto* c_sig = app.add_subcommand("signature", "Background and defect runs with crack signatures");
  c_sig->add_option("spec", sig_spec, "Experiment spec")->required();
  c_sig->add_option("-o,--out", sig_out, "Output directory")->required();
  c_sig->add_option("--method", sig_method, "Override: td1 | td2 | fd")->check(CLI::IsMember({"td1", "td2", "fd"}));

  std::vector<std::size_t> sizes{125, 250, 500, 1000};
  std::size_t bench_steps = 2000, bench_repeats = 3;
  std::string bench_out;
  auto* c_bench = app.add_subcommand("bench", "TD1/TD2/FD cost against grid size");
  c_bench->add_option("--sizes", sizes, "Target N0 values")->delimiter(',')->capture_default_str();
  c_bench->add_option("--steps", bench_steps, "Steps per timing run")->check(CLI::PositiveNumber)->capture_default_str();
  c_bench->add_option("--repeats", bench_repeats, "Timing runs per size")->check(CLI::PositiveNumber)->capture_default_str();
  c_bench->add_option("-o,--out", bench_out, "Bench CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c_gen) gen_tube(gt);
    else if (*c_spec) write_file(spec_out, serialize_experiment(default_experiment()));
    else if (*c_asm) assemble(as);
    else if (*c_modes) modes(modes_cache, modes_out, common);
    else if (*c_sim) simulate(sim, common);
    else if (*c_fd) fd(fd_cache, fd_drive, fd_freqs, fd_out, common);
    else if (*c_sig) signature(sig_spec, sig_out, sig_method, common);
    else if (*c_bench) bench(sizes, bench_steps, bench_repeats, bench_out, common);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
