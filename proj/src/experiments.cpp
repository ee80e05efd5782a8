#include "adqc/experiments.hpp"

#include "adqc/anderson.hpp"
#include "adqc/bdg.hpp"
#include "adqc/bloch.hpp"
#include "adqc/chain.hpp"
#include "adqc/detection.hpp"
#include "adqc/exact.hpp"
#include "adqc/exchange.hpp"
#include "adqc/fit.hpp"
#include "adqc/lindblad.hpp"
#include "adqc/magnon.hpp"
#include "adqc/pauli.hpp"
#include "adqc/rng.hpp"
#include "adqc/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace adqc {

namespace {

// The output directory and worker count are artifact plumbing: neither may
// change a single data byte, so both stay out of the config hash and out of
// the config echoed into summary.json.
Json physics_config(const Json& cfg) {
  Json c = cfg;
  c.erase("out_dir");
  c.erase("workers");
  return c;
}

// Per-run scaffolding: resolve the config, create the output directory, and
// stamp every file with the same provenance header.
struct Driver {
  Json cfg;
  std::filesystem::path out;
  RunStamp stamp;
  RunSummary sum;
  int workers = 1;

  Driver(const char* experiment, const Json& user) {
    cfg = merge_config(default_config(experiment), user);
    out = std::filesystem::path(get_string(cfg, "out_dir"));
    std::filesystem::create_directories(out);
    workers = static_cast<int>(get_count(cfg, "workers"));
    require_config(workers >= 0, "config.workers: must be >= 0");
    stamp.experiment = experiment;
    stamp.config_hash = config_hash(physics_config(cfg));
    stamp.seed = get_seed(cfg, "seed");
    sum.result["experiment"] = experiment;
    sum.result["version"] = version;
    sum.result["config_hash"] = stamp.config_hash;
    sum.result["seed"] = stamp.seed;
    sum.result["config"] = physics_config(cfg);
  }

  TableWriter table(
      const std::string& filename, const std::vector<std::string>& columns,
      const std::vector<std::pair<std::string, std::string>>& notes = {}) {
    RunStamp s = stamp;
    s.notes = notes;
    sum.files.push_back(out / filename);
    return TableWriter(out / filename, s, columns);
  }

  RunSummary finish() {
    Json names = Json::array();
    for (const auto& f : sum.files) names.push_back(f.filename().string());
    names.push_back("summary.json");
    sum.result["files"] = names;
    sum.files.push_back(out / "summary.json");
    write_json_file(out / "summary.json", sum.result);
    return std::move(sum);
  }
};

std::vector<double> uniform_time_grid(double t0, double t_max, double dt) {
  require_config(std::isfinite(t0) && std::isfinite(t_max) && t_max >= t0,
                 "config: time span must be finite with t_max >= t0");
  require_config(dt > 0.0 && std::isfinite(dt), "config: dt must be positive");
  const Index n = static_cast<Index>(std::floor((t_max - t0) / dt + 1e-9)) + 1;
  std::vector<double> grid(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i)
    grid[static_cast<size_t>(i)] = t0 + dt * static_cast<double>(i);
  return grid;
}

AnnealSchedule resolve_schedule(const std::string& name) {
  if (name == "builtin") return AnnealSchedule::builtin();
  return load_schedule_file(name);
}

double expect_real(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& op) {
  return (rho * op).trace().real();
}

Json fit_to_json(const FitResult& fit) {
  Json params = Json::object();
  for (size_t i = 0; i < fit.names.size(); ++i) {
    params[fit.names[i]] = {{"value", fit.estimate[static_cast<Index>(i)]},
                            {"std_error", fit.std_error[static_cast<Index>(i)]},
                            {"unit", fit.units[i]}};
  }
  return Json{{"converged", fit.converged},
              {"iterations", fit.iterations},
              {"rss", fit.rss},
              {"params", params}};
}

std::string format_flag(bool b) { return b ? "1" : "0"; }

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "larmor", "exchange", "chain", "anderson", "detection", "rwa-check"};
  return names;
}

Json default_config(const std::string& experiment) {
  if (experiment == "larmor") {
    return Json{
        {"seed", 1},
        {"workers", 1},
        {"out_dir", "adqc-out/larmor"},
        {"engine", "lindblad"},  // lindblad | analytic
        {"delta_ghz", 1.0},
        {"t1_ns", 32.0},
        {"tphi_ns", 12.0},
        {"t0_ns", 0.0},
        {"t_max_ns", 30.0},
        {"dt_ns", 0.25},
        // Detector-axis panels: source fixed at (pi/2, 0), detector polar
        // angle swept from sigma^x readout toward sigma^z.
        {"detector_thetas", Json::array({0.5 * pi, 0.25 * pi, 0.0})},
        // Source-state panels: detector fixed at (pi/2, 0), source swept
        // from |+> toward |1>; the last stops short of pi so the azimuth
        // stays identifiable from data.
        {"source_thetas", Json::array({0.5 * pi, 0.75 * pi, 0.95 * pi})},
        {"noise_sigma", 0.0},
        {"fit", true},
    };
  }
  if (experiment == "exchange") {
    return Json{
        {"seed", 2},
        {"workers", 1},
        {"out_dir", "adqc-out/exchange"},
        {"delta_ghz", 1.0},
        {"couplings_ghz", Json::array({0.0, 0.15, 0.30})},
        {"t1_ns", 30.0},
        {"tphi_ns", 37.0},
        {"t_max_ns", 30.0},
        {"dt_ns", 0.25},
        {"noise_sigma", 0.0},
        {"fit", true},
    };
  }
  if (experiment == "chain") {
    return Json{
        {"seed", 3},
        {"workers", 1},
        {"out_dir", "adqc-out/chain"},
        {"basis", "x"},       // x | z
        {"engine", "fermion"},  // fermion | exact | magnon
        {"length", 56},
        {"delta_ghz", 2.0},
        {"coupling_ghz", -0.60},
        {"periodic", true},
        {"steps", 200},
        {"dt_ns", 0.1},
        // Site seeded with the excitation for z-basis fields; -1 = center.
        {"excite_site", -1},
        // Uniform disorder half-spread is coupling * disorder_w / 2.
        {"disorder_w", 0.0},
        {"pad_factor", 4},
        {"window", "hann"},  // hann | none
        // Derive (delta, coupling) from a schedule held at s_star instead of
        // taking them directly: "" = off, "builtin" = synthetic default
        // table, anything else = path to a tabulated schedule file.
        {"schedule_file", ""},
        {"s_star", 0.35},
        {"programmed_j", -0.3},
        // At L <= 12, rerun the field with the dense engine and report the
        // largest pointwise difference.
        {"cross_check", false},
    };
  }
  if (experiment == "anderson") {
    return Json{
        {"seed", 5},
        {"workers", 1},
        {"out_dir", "adqc-out/anderson"},
        {"length", 124},
        {"delta_ghz", 2.0},
        {"coupling_ghz", 0.20},
        {"periodic", true},
        {"w_values", Json::array({0.0, 1.0, 2.0, 4.0, 8.0})},
        // Small-W points feeding the power-law fit; must lie in (0, 2].
        {"scaling_w_values", Json::array({0.5, 0.75, 1.0, 1.5, 2.0})},
        {"realizations", 400},
        {"t_max_ns", 20.0},
        {"dt_ns", 0.25},
        {"late_window_ns", Json::array({15.0, 20.0})},
    };
  }
  if (experiment == "detection") {
    return Json{
        {"seed", 8},
        {"workers", 1},
        {"out_dir", "adqc-out/detection"},
        {"schedule_file", "builtin"},
        {"quench",
         Json{
             {"target_gap_ghz", 2.0},
             {"detector_j", -1.8},
             {"ramp_ns", 2.0},
             {"t_total_ns", 6.0},
             {"steps", 0},
             {"tilt",
              Json{
                  {"amplitude_ghz", 0.0},
                  {"t_on_ns", 0.0},
                  {"t_off_ns", 5.0},
                  {"edge_ns", 0.25},
              }},
         }},
        {"couplings_ghz",
         Json::array({0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7})},
    };
  }
  if (experiment == "rwa-check") {
    return Json{
        {"seed", 13},
        {"workers", 1},
        {"out_dir", "adqc-out/rwa-check"},
        {"cases", 10},
        {"lengths", Json::array({2, 3, 4, 5, 6})},
        {"coupling_range_ghz", Json::array({0.1, 0.4})},
        {"delta_range_ghz", Json::array({0.8, 1.2})},
        // Dimensionless |coupling| * t reach of the time grid.
        {"jt_max", 4.0},
        {"points", 21},
    };
  }
  throw config_error("unknown experiment '" + experiment + "'");
}

// ---------------------------------------------------------------------------
// larmor

RunSummary run_larmor(const Json& user) {
  Driver d("larmor", user);
  const Json& cfg = d.cfg;
  const double delta = get_number(cfg, "delta_ghz");
  const NoiseParams noise(get_number(cfg, "t1_ns"), get_number(cfg, "tphi_ns"));
  const std::string engine = get_string(cfg, "engine");
  require_config(engine == "lindblad" || engine == "analytic",
                 "config.engine: larmor engine must be lindblad or analytic");
  const double sigma = get_number(cfg, "noise_sigma");
  require_config(sigma >= 0.0, "config.noise_sigma: must be >= 0");
  const double t0 = get_number(cfg, "t0_ns");
  const std::vector<double> grid =
      uniform_time_grid(t0, get_number(cfg, "t_max_ns"), get_number(cfg, "dt_ns"));
  const Index n_t = static_cast<Index>(grid.size());

  struct Panel {
    std::string role;  // which axis the panel sweeps
    BlochAxis source, detector;
  };
  std::vector<Panel> panels;
  for (double td : get_number_list(cfg, "detector_thetas"))
    panels.push_back({"detector", {0.5 * pi, 0.0}, {td, 0.0}});
  for (double ts : get_number_list(cfg, "source_thetas"))
    panels.push_back({"source", {ts, 0.0}, {0.5 * pi, 0.0}});
  require_config(!panels.empty(), "config: no panels requested");

  const Rng root(d.stamp.seed);
  Json panel_summaries = Json::array();
  for (size_t p = 0; p < panels.size(); ++p) {
    const Panel& panel = panels[p];
    Eigen::VectorXd t_vec(n_t), m(n_t);

    if (engine == "analytic") {
      for (Index i = 0; i < n_t; ++i)
        m[i] = larmor_magnetization(panel.source, panel.detector, delta, noise,
                                    grid[static_cast<size_t>(i)], t0);
    } else {
      // Density-matrix route: the config angles are accumulated precession
      // phases, so preparation and readout use the negated azimuth.
      const Eigen::MatrixXcd h = -0.5 * delta * pauli_z().cast<cplx>();
      const Eigen::MatrixXcd rho0 = density_from_bloch(
          bloch_axis(panel.source.theta, -panel.source.phi));
      const Eigen::MatrixXcd meas =
          axis_operator(panel.detector.theta, -panel.detector.phi).cast<cplx>();
      const std::vector<Eigen::MatrixXcd> rhos =
          lindblad_integrate(h, single_qubit_jumps(noise), rho0, grid);
      for (Index i = 0; i < n_t; ++i)
        m[i] = expect_real(rhos[static_cast<size_t>(i)], meas);
    }
    for (Index i = 0; i < n_t; ++i) t_vec[i] = grid[static_cast<size_t>(i)];
    if (sigma > 0.0) {
      Rng rng = root.stream(static_cast<std::uint64_t>(p));
      for (Index i = 0; i < n_t; ++i) m[i] += sigma * rng.normal();
    }

    const std::string filename = "panel_" + std::to_string(p) + ".tsv";
    TableWriter table = d.table(
        filename, {"t_ns", "m"},
        {{"engine", engine},
         {"role", panel.role},
         {"theta_s", format_number(panel.source.theta)},
         {"phi_s", format_number(panel.source.phi)},
         {"theta_d", format_number(panel.detector.theta)},
         {"phi_d", format_number(panel.detector.phi)}});
    for (Index i = 0; i < n_t; ++i) table.row({t_vec[i], m[i]});

    Json entry{{"file", filename},
               {"role", panel.role},
               {"theta_s", panel.source.theta},
               {"phi_s", panel.source.phi},
               {"theta_d", panel.detector.theta},
               {"phi_d", panel.detector.phi},
               {"fit", nullptr}};
    if (get_flag(cfg, "fit")) {
      LarmorParams init;
      init.delta = delta;
      init.t1 = noise.t1;
      init.t2 = noise.t2();
      init.theta_s = panel.source.theta;
      init.phi_s = panel.source.phi;
      init.theta_d = panel.detector.theta;
      init.phi_d = panel.detector.phi;
      const std::vector<std::string> free_names =
          panel.role == "detector"
              ? std::vector<std::string>{"theta_d", "phi_d"}
              : std::vector<std::string>{"theta_s", "phi_s"};
      const FitOptions options;
      if (detail::window_indices(t_vec, options).size() >=
          2 * free_names.size()) {
        try {
          entry["fit"] = fit_to_json(fit_larmor(t_vec, m, init, free_names, options));
        } catch (const numerical_error&) {
          // Polar angle at a pole: the azimuth carries no signal.  Pin it at
          // the configured value and fit the polar angle alone.
          try {
            Json fit = fit_to_json(
                fit_larmor(t_vec, m, init, {free_names.front()}, options));
            fit["note"] = "azimuth unconstrained; fixed at configured value";
            entry["fit"] = fit;
          } catch (const numerical_error& err) {
            entry["fit"] = Json{{"error", err.what()}};
          }
        }
      }
    }
    panel_summaries.push_back(entry);
  }
  d.sum.result["panels"] = panel_summaries;
  return d.finish();
}

// ---------------------------------------------------------------------------
// exchange

RunSummary run_exchange(const Json& user) {
  Driver d("exchange", user);
  const Json& cfg = d.cfg;
  const double delta = get_number(cfg, "delta_ghz");
  const NoiseParams noise(get_number(cfg, "t1_ns"), get_number(cfg, "tphi_ns"));
  const double sigma = get_number(cfg, "noise_sigma");
  require_config(sigma >= 0.0, "config.noise_sigma: must be >= 0");
  const std::vector<double> couplings = get_number_list(cfg, "couplings_ghz");
  require_config(!couplings.empty(), "config.couplings_ghz: empty sweep");
  const std::vector<double> grid =
      uniform_time_grid(0.0, get_number(cfg, "t_max_ns"), get_number(cfg, "dt_ns"));
  const Index n_t = static_cast<Index>(grid.size());

  // One-excitation launch |10>: site 0 excited, site 1 ground.
  const Eigen::VectorXcd psi0 = basis_state(2, {0});
  const Eigen::MatrixXcd rho0 = psi0 * psi0.adjoint();
  const Eigen::MatrixXcd z0 = embed_qubit_op(pauli_z(), 0, 2);
  const Eigen::MatrixXcd z1 = embed_qubit_op(pauli_z(), 1, 2);
  const Eigen::MatrixXcd zz = z0 * z1;
  const std::vector<JumpOp> jumps = uniform_register_jumps(noise, 2);

  const Rng root(d.stamp.seed);
  Eigen::VectorXd t_vec(n_t);
  for (Index i = 0; i < n_t; ++i) t_vec[i] = grid[static_cast<size_t>(i)];

  Json sweeps = Json::array();
  std::vector<Eigen::VectorXd> szsz_clean;
  for (size_t ci = 0; ci < couplings.size(); ++ci) {
    const double coupling = couplings[ci];
    const Eigen::MatrixXcd h =
        build_xy(EffectiveXYModel::uniform(2, delta, coupling, false))
            .cast<cplx>();
    const std::vector<Eigen::MatrixXcd> rhos =
        lindblad_integrate(h, jumps, rho0, grid);

    Eigen::VectorXd sz1(n_t), sz2(n_t), szsz(n_t);
    for (Index i = 0; i < n_t; ++i) {
      const Eigen::MatrixXcd& rho = rhos[static_cast<size_t>(i)];
      sz1[i] = expect_real(rho, z0);
      sz2[i] = expect_real(rho, z1);
      szsz[i] = expect_real(rho, zz);
    }
    szsz_clean.push_back(szsz);
    if (sigma > 0.0) {
      Rng rng = root.stream(static_cast<std::uint64_t>(ci));
      for (Index i = 0; i < n_t; ++i) sz1[i] += sigma * rng.normal();
      for (Index i = 0; i < n_t; ++i) sz2[i] += sigma * rng.normal();
      for (Index i = 0; i < n_t; ++i) szsz[i] += sigma * rng.normal();
    }

    const std::string filename = "exchange_" + std::to_string(ci) + ".tsv";
    TableWriter table = d.table(
        filename,
        {"t_ns", "sz1", "sz2", "szsz", "sz1_model", "sz2_model", "szsz_model"},
        {{"coupling_ghz", format_number(coupling)}});
    bool regime_ok = true;
    for (Index i = 0; i < n_t; ++i) {
      const ExchangeObservables model =
          two_qubit_exchange(coupling, noise, t_vec[i]);
      regime_ok = regime_ok && model.regime_ok;
      table.row({t_vec[i], sz1[i], sz2[i], szsz[i], model.sz1, model.sz2,
                 model.szsz});
    }

    Json entry{{"file", filename},
               {"coupling_ghz", coupling},
               {"regime_ok", regime_ok},
               {"fit", nullptr}};
    if (get_flag(cfg, "fit") && coupling != 0.0) {
      ExchangeGuess guess;
      guess.t1 = noise.t1;
      guess.tphi = noise.tphi;
      guess.coupling = coupling;
      try {
        entry["fit"] = fit_to_json(fit_exchange(t_vec, sz1, sz2, szsz, guess));
      } catch (const numerical_error& err) {
        entry["fit"] = Json{{"error", err.what()}};
      }
    }
    sweeps.push_back(entry);
  }

  // The correlator is coupling-independent up to integrator error; report
  // the spread of the noiseless series across the sweep.
  double spread = 0.0;
  for (size_t ci = 1; ci < szsz_clean.size(); ++ci)
    spread = std::max(
        spread, (szsz_clean[ci] - szsz_clean[0]).cwiseAbs().maxCoeff());
  d.sum.result["szsz_coupling_spread"] = spread;
  d.sum.result["couplings"] = sweeps;
  return d.finish();
}

// ---------------------------------------------------------------------------
// chain

RunSummary run_chain(const Json& user) {
  Driver d("chain", user);
  const Json& cfg = d.cfg;
  const std::string basis = get_string(cfg, "basis");
  require_config(basis == "x" || basis == "z",
                 "config.basis: must be x or z");
  const std::string engine = get_string(cfg, "engine");
  require_config(engine == "fermion" || engine == "exact" || engine == "magnon",
                 "config.engine: chain engine must be fermion, exact or "
                 "magnon (a density-matrix integrator is impractical at "
                 "chain sizes)");
  const Index length = get_count(cfg, "length");
  require_config(length >= 2, "config.length: need at least two sites");
  const bool periodic = get_flag(cfg, "periodic");
  const Index steps = get_count(cfg, "steps");
  const double dt = get_number(cfg, "dt_ns");
  const double disorder_w = get_number(cfg, "disorder_w");
  require_config(disorder_w >= 0.0, "config.disorder_w: must be >= 0");

  // Effective parameters, either direct or derived from a schedule held at
  // the configured operating point.
  double delta = get_number(cfg, "delta_ghz");
  double coupling = get_number(cfg, "coupling_ghz");
  const std::string schedule_name = get_string(cfg, "schedule_file");
  if (!schedule_name.empty()) {
    const AnnealSchedule schedule = resolve_schedule(schedule_name);
    ChainSpec spec;
    spec.length = length;
    spec.periodic = periodic;
    spec.s_star = get_number(cfg, "s_star");
    spec.programmed_j =
        Eigen::VectorXd::Constant(spec.bond_count(), get_number(cfg, "programmed_j"));
    spec.s_offset = Eigen::VectorXd::Zero(length);
    const EffectiveXYModel m = build_effective_model(spec, schedule);
    delta = m.delta;
    coupling = m.coupling[0];
  }

  // Shared disorder draws so every engine sees the same realization.
  Eigen::VectorXd detuning = Eigen::VectorXd::Zero(length);
  if (disorder_w > 0.0) {
    Rng rng = Rng(d.stamp.seed).stream(0);
    const double half_width = 0.5 * std::abs(coupling) * disorder_w;
    for (Index i = 0; i < length; ++i)
      detuning[i] = rng.uniform(-half_width, half_width);
  }

  Index site = get_count(cfg, "excite_site");
  if (site < 0) site = length / 2;
  require_config(site < length, "config.excite_site: outside the chain");

  const auto make_exact_model = [&]() {
    EffectiveXYModel m = EffectiveXYModel::uniform(length, delta, coupling, periodic);
    m.detuning = detuning;
    return m;
  };
  const auto make_bdg = [&]() {
    BdGSystem sys = BdGSystem::uniform(length, delta, coupling, periodic);
    sys.site_energy += detuning;
    return sys;
  };

  const auto dense_field = [&](const EffectiveXYModel& m) {
    const EigenPropagator prop(build_tfim(m));
    SpaceTimeField f;
    f.dt = dt;
    f.values.resize(length, steps);
    Eigen::VectorXcd psi0;
    if (basis == "x") {
      const Eigen::VectorXcd vac = basis_state(static_cast<int>(length), {});
      psi0 = (vac + apply_sigma_x(vac, 0)) / std::sqrt(2.0);
      f.basis = FieldBasis::x;
    } else {
      psi0 = basis_state(static_cast<int>(length), {static_cast<int>(site)});
      f.basis = FieldBasis::z;
    }
    for (Index j = 0; j < steps; ++j) {
      const Eigen::VectorXcd psi = prop.evolve(psi0, dt * static_cast<double>(j));
      for (Index n = 0; n < length; ++n) {
        if (basis == "x")
          f.values(n, j) = psi.dot(apply_sigma_x(psi, static_cast<int>(n))).real();
        else
          f.values(n, j) = 0.5 * (1.0 - expect_sz(psi, static_cast<int>(n)));
      }
    }
    f.validate();
    return f;
  };

  SpaceTimeField field;
  if (engine == "fermion") {
    const BdGSystem sys = make_bdg();
    field = basis == "x" ? x_basis_field(sys, dt, steps)
                         : excitation_field(sys, site, dt, steps);
  } else if (engine == "exact") {
    field = dense_field(make_exact_model());
  } else {
    require_config(disorder_w == 0.0,
                   "config.engine: the magnon closed forms hold only for "
                   "clean chains (disorder_w must be 0)");
    require_config(periodic,
                   "config.engine: the magnon closed forms are for rings "
                   "(periodic must be true)");
    const MagnonModel m(delta, coupling, length);
    field = basis == "x" ? magnon_x_field(m, dt, steps)
                         : magnon_density_field(m, dt, steps);
  }

  // Space-time record, rows = time samples.
  {
    std::vector<std::string> columns = {"t_ns"};
    for (Index n = 0; n < length; ++n)
      columns.push_back("site_" + std::to_string(n));
    TableWriter table = d.table("field.tsv", columns,
                                {{"engine", engine}, {"basis", basis}});
    std::vector<double> row(static_cast<size_t>(length) + 1);
    for (Index j = 0; j < steps; ++j) {
      row[0] = dt * static_cast<double>(j);
      for (Index n = 0; n < length; ++n)
        row[static_cast<size_t>(n) + 1] = field.values(n, j);
      table.row(row);
    }
  }

  const std::string window_name = get_string(cfg, "window");
  require_config(window_name == "hann" || window_name == "none",
                 "config.window: must be hann or none");
  const Spectrum spec =
      fft2(field, window_name == "hann" ? SpectralWindow::hann : SpectralWindow::none,
           get_count(cfg, "pad_factor"));

  {
    TableWriter table = d.table("spectrum.tsv", {"k", "omega_ghz", "magnitude"},
                                {{"engine", engine}, {"basis", basis}});
    for (Index m = 0; m < spec.momenta(); ++m)
      for (Index b = 0; b < spec.bins(); ++b)
        table.row({spec.k_grid[m], spec.omega_grid[b], spec.magnitude(m, b)});
  }

  // Ridge against the model peak law, where one applies: the clean band for
  // x-basis fields, the density difference-frequency law for z-basis ones.
  const bool have_model = disorder_w == 0.0;
  const auto model_omega = [&](double k) {
    if (basis == "z") return std::abs(2.0 * coupling * std::sin(0.5 * k));
    if (engine == "magnon")
      return std::abs(delta + coupling * std::cos(k));  // first-order band
    return dispersion_exact(delta, coupling, k);
  };

  std::vector<double> ridge_q, model_q;
  Index qualified = 0;
  {
    TableWriter table =
        d.table("ridge.tsv",
                {"k_index", "k", "omega_ghz", "contrast", "low_contrast",
                 "omega_model_ghz", "deviation_bins"},
            {{"engine", engine},
             {"basis", basis},
             {"omega_resolution_ghz", format_number(spec.omega_resolution)}});
    for (Index m = 0; m < spec.momenta(); ++m) {
      const RidgePoint point = extract_ridge(spec, m);
      const double k = spec.k_grid[m];
      double omega_model = std::numeric_limits<double>::quiet_NaN();
      double deviation = std::numeric_limits<double>::quiet_NaN();
      if (have_model) {
        omega_model = model_omega(k);
        deviation = std::abs(point.omega - omega_model) / spec.omega_resolution;
        if (!point.low_contrast) {
          ridge_q.push_back(point.omega);
          model_q.push_back(omega_model);
          ++qualified;
        }
      }
      table.row({format_integer(m), format_number(k),
                 format_number(point.omega), format_number(point.contrast),
                 format_flag(point.low_contrast), format_number(omega_model),
                 format_number(deviation)});
    }
  }

  d.sum.result["delta_ghz"] = delta;
  d.sum.result["coupling_ghz"] = coupling;
  d.sum.result["omega_resolution_ghz"] = spec.omega_resolution;
  d.sum.result["qualified_momenta"] = qualified;
  if (have_model && qualified > 0) {
    const Eigen::VectorXd rv =
        Eigen::Map<const Eigen::VectorXd>(ridge_q.data(), static_cast<Index>(ridge_q.size()));
    const Eigen::VectorXd mv =
        Eigen::Map<const Eigen::VectorXd>(model_q.data(), static_cast<Index>(model_q.size()));
    const DispersionDeviation dev =
        compare_dispersion(rv, mv, spec.omega_resolution);
    d.sum.result["ridge_max_bins"] = dev.max_bins;
    d.sum.result["ridge_rms_bins"] = dev.rms_bins;
  } else {
    d.sum.result["ridge_max_bins"] = nullptr;
    d.sum.result["ridge_rms_bins"] = nullptr;
  }

  if (get_flag(cfg, "cross_check")) {
    require_config(engine == "fermion",
                   "config.cross_check: only checks the fermion engine");
    const SpaceTimeField dense = dense_field(make_exact_model());
    d.sum.result["cross_check_max_dev"] =
        (dense.values - field.values).cwiseAbs().maxCoeff();
  } else {
    d.sum.result["cross_check_max_dev"] = nullptr;
  }
  return d.finish();
}

RunSummary run_chain(Json config, const std::string& basis) {
  config["basis"] = basis;
  return run_chain(config);
}

// ---------------------------------------------------------------------------
// anderson

RunSummary run_anderson(const Json& user) {
  Driver d("anderson", user);
  const Json& cfg = d.cfg;
  const Index length = get_count(cfg, "length");
  const BdGSystem base =
      BdGSystem::uniform(length, get_number(cfg, "delta_ghz"),
                         get_number(cfg, "coupling_ghz"), get_flag(cfg, "periodic"));
  const Index realizations = get_count(cfg, "realizations");
  require_config(realizations >= 1, "config.realizations: must be >= 1");
  const std::vector<double> grid =
      uniform_time_grid(0.0, get_number(cfg, "t_max_ns"), get_number(cfg, "dt_ns"));
  const Index n_t = static_cast<Index>(grid.size());
  const std::vector<double> window = get_number_list(cfg, "late_window_ns");
  require_config(window.size() == 2 && window[0] <= window[1],
                 "config.late_window_ns: expected [t_lo, t_hi]");

  const std::vector<double> w_main = get_number_list(cfg, "w_values");
  const std::vector<double> w_scaling = get_number_list(cfg, "scaling_w_values");
  require_config(!w_main.empty(), "config.w_values: empty sweep");

  // Each distinct W runs once; the monotonicity summary uses the main list,
  // the power-law fit the scaling list.
  std::vector<double> w_all = w_main;
  w_all.insert(w_all.end(), w_scaling.begin(), w_scaling.end());
  std::sort(w_all.begin(), w_all.end());
  w_all.erase(std::unique(w_all.begin(), w_all.end()), w_all.end());
  for (double w : w_all)
    require_config(w >= 0.0 && std::isfinite(w),
                   "config.w_values: W must be finite and >= 0");

  const std::vector<Index> excited = staggered_sites(length);
  const std::vector<std::string> ensemble_columns = {"W", "realization", "t_ns",
                                                     "I"};
  TableWriter ensemble_table = d.table("ensemble.tsv", ensemble_columns);

  struct WStat {
    double w = 0.0, mean = 0.0, stderr_mean = 0.0;
  };
  std::vector<WStat> stats;
  for (double w : w_all) {
    // The same seed (hence the same unit draws) is reused for every W:
    // realization r differs across W only by the disorder scale, so sweeps
    // share their randomness and W-to-W differences are low-variance.
    const std::vector<BdGSystem> ensemble =
        disorder_ensemble(base, w, realizations, d.stamp.seed);
    Eigen::MatrixXd series(realizations, n_t);
    Eigen::VectorXd lates(realizations);
    parallel_for(realizations, d.workers, [&](Index r) {
      const BdGPropagator prop(
          build_bdg(ensemble[static_cast<size_t>(r)], ParitySector::odd));
      const Eigen::MatrixXd occupation = prop.occupation_series(excited, grid);
      const Eigen::MatrixXd tau_x = 1.0 - 2.0 * occupation.array();
      const ImbalanceSeries imb = imbalance(tau_x, grid);
      series.row(r) = imb.value.transpose();
      lates[r] = imb.late_average(window[0], window[1]);
    });
    for (Index r = 0; r < realizations; ++r)
      for (Index i = 0; i < n_t; ++i)
        ensemble_table.row({format_number(w), format_integer(r),
                            format_number(grid[static_cast<size_t>(i)]),
                            format_number(series(r, i))});
    WStat st;
    st.w = w;
    st.mean = lates.mean();
    if (realizations > 1)
      st.stderr_mean = std::sqrt((lates.array() - st.mean).square().sum() /
                                 static_cast<double>(realizations - 1) /
                                 static_cast<double>(realizations));
    stats.push_back(st);
  }

  {
    TableWriter table =
        d.table("summary.tsv", {"W", "imbalance_mean", "imbalance_stderr"});
    for (const WStat& st : stats) table.row({st.w, st.mean, st.stderr_mean});
  }

  const auto stat_for = [&](double w) {
    for (const WStat& st : stats)
      if (st.w == w) return st;
    throw std::logic_error("anderson: missing sweep");
  };

  Json per_w = Json::array();
  for (const WStat& st : stats)
    per_w.push_back(Json{{"W", st.w},
                         {"imbalance_mean", st.mean},
                         {"imbalance_stderr", st.stderr_mean}});
  d.sum.result["sweeps"] = per_w;

  // Strict growth along the main list, with a one-sigma allowance.
  bool monotone = true;
  for (size_t i = 0; i + 1 < w_main.size(); ++i) {
    const WStat a = stat_for(w_main[i]);
    const WStat b = stat_for(w_main[i + 1]);
    monotone = monotone &&
               b.mean - a.mean > -(a.stderr_mean + b.stderr_mean);
  }
  d.sum.result["imbalance_monotone"] = monotone;

  if (w_scaling.size() >= 4) {
    std::vector<double> lates;
    for (double w : w_scaling) lates.push_back(stat_for(w).mean);
    const ScalingFit fit = fit_quadratic_scaling(w_scaling, lates);
    d.sum.result["scaling_fit"] =
        Json{{"coefficient", fit.coefficient},
             {"exponent", fit.exponent},
             {"coefficient_err", fit.coefficient_err},
             {"exponent_err", fit.exponent_err},
             {"points_used", static_cast<Index>(fit.used.size())},
             {"points_dropped", static_cast<Index>(fit.dropped.size())},
             // Measured hardware value for the quadratic coefficient, kept
             // for side-by-side reading; nothing is asserted against it.
             {"reference_coefficient", 0.017}};
  } else {
    d.sum.result["scaling_fit"] = nullptr;
  }
  return d.finish();
}

// ---------------------------------------------------------------------------
// detection

RunSummary run_detection(const Json& user) {
  Driver d("detection", user);
  const Json& cfg = d.cfg;
  const std::string schedule_name = get_string(cfg, "schedule_file");
  require_config(!schedule_name.empty(),
                 "config.schedule_file: detection needs a schedule");
  const AnnealSchedule schedule = resolve_schedule(schedule_name);

  const Json& qc = cfg.at("quench");
  DetectorQuench q;
  q.target_gap = get_number(qc, "target_gap_ghz");
  q.detector_j = get_number(qc, "detector_j");
  q.ramp_time = get_number(qc, "ramp_ns");
  q.t_total = get_number(qc, "t_total_ns");
  q.steps = get_count(qc, "steps");
  const Json& tc = qc.at("tilt");
  q.tilt.amplitude = get_number(tc, "amplitude_ghz");
  q.tilt.t_on = get_number(tc, "t_on_ns");
  q.tilt.t_off = get_number(tc, "t_off_ns");
  q.tilt.edge = get_number(tc, "edge_ns");
  q.validate();

  const ReadoutAxis axis = detection_axis(schedule, q);
  d.sum.result["axis"] = Json{{"theta", axis.theta},
                              {"phi", axis.phi},
                              {"fidelity", axis.fidelity},
                              {"pauli_zx", axis.pauli.x()},
                              {"pauli_zy", axis.pauli.y()},
                              {"pauli_zz", axis.pauli.z()}};

  const std::vector<double> couplings = get_number_list(cfg, "couplings_ghz");
  require_config(!couplings.empty(), "config.couplings_ghz: empty sweep");
  const std::vector<TwoTargetReadout> sweep =
      two_target_sweep(schedule, q, couplings, d.workers);

  {
    TableWriter table = d.table(
        "sweep.tsv", {"coupling_ghz", "theta", "phi", "f_local", "f_nonlocal"},
        {{"schedule", schedule.source()}});
    for (const TwoTargetReadout& r : sweep)
      table.row({r.coupling, r.theta, r.phi, r.f_local, r.f_nonlocal});
  }

  bool local_monotone = true;
  for (size_t i = 0; i + 1 < sweep.size(); ++i)
    local_monotone =
        local_monotone && sweep[i + 1].f_local <= sweep[i].f_local + 1e-9;
  double floor_gap = 0.0;
  for (const TwoTargetReadout& r : sweep)
    floor_gap = std::min(floor_gap, r.f_nonlocal - r.f_local);
  d.sum.result["f_local_monotone"] = local_monotone;
  d.sum.result["min_nonlocal_excess"] = floor_gap;
  Json rows = Json::array();
  for (const TwoTargetReadout& r : sweep)
    rows.push_back(Json{{"coupling_ghz", r.coupling},
                        {"theta", r.theta},
                        {"phi", r.phi},
                        {"f_local", r.f_local},
                        {"f_nonlocal", r.f_nonlocal}});
  d.sum.result["sweep"] = rows;
  return d.finish();
}

// ---------------------------------------------------------------------------
// rwa-check

RunSummary run_rwa_check(const Json& user) {
  Driver d("rwa-check", user);
  const Json& cfg = d.cfg;
  const Index cases = get_count(cfg, "cases");
  require_config(cases >= 1, "config.cases: must be >= 1");
  const std::vector<double> lengths = get_number_list(cfg, "lengths");
  require_config(!lengths.empty(), "config.lengths: empty list");
  const std::vector<double> j_range = get_number_list(cfg, "coupling_range_ghz");
  const std::vector<double> d_range = get_number_list(cfg, "delta_range_ghz");
  require_config(j_range.size() == 2 && 0.0 < j_range[0] &&
                     j_range[0] <= j_range[1],
                 "config.coupling_range_ghz: expected [lo, hi] with lo > 0");
  require_config(d_range.size() == 2 && 0.0 < d_range[0] &&
                     d_range[0] <= d_range[1],
                 "config.delta_range_ghz: expected [lo, hi] with lo > 0");
  const double jt_max = get_number(cfg, "jt_max");
  const Index points = get_count(cfg, "points");
  require_config(jt_max > 0.0, "config.jt_max: must be > 0");
  require_config(points >= 2, "config.points: need at least two");

  const Rng root(d.stamp.seed);
  TableWriter table =
      d.table("cases.tsv", {"case", "length", "delta_ghz", "coupling_ghz",
                            "err_base", "err_doubled", "ratio"});
  double min_ratio = inf;
  double worst_err = 0.0;
  for (Index c = 0; c < cases; ++c) {
    const Index length = static_cast<Index>(
        lengths[static_cast<size_t>(c) % lengths.size()]);
    require_config(length >= 2, "config.lengths: need at least two sites");
    Rng rng = root.stream(static_cast<std::uint64_t>(c));
    const double coupling = rng.uniform(j_range[0], j_range[1]);
    const double delta = rng.uniform(d_range[0], d_range[1]);

    // Fixed dimensionless reach: the grid covers |coupling| t <= jt_max for
    // both gap settings, so halving the relative coupling is the only change.
    Eigen::VectorXd t_grid(points);
    for (Index i = 0; i < points; ++i)
      t_grid[i] = jt_max / coupling * static_cast<double>(i) /
                  static_cast<double>(points - 1);

    const Eigen::VectorXcd vac = basis_state(static_cast<int>(length), {});
    const Eigen::VectorXcd psi0 = (vac + apply_sigma_x(vac, 0)) / std::sqrt(2.0);
    const double err_base = rwa_error(
        EffectiveXYModel::uniform(length, delta, coupling, false), psi0, t_grid);
    const double err_doubled = rwa_error(
        EffectiveXYModel::uniform(length, 2.0 * delta, coupling, false), psi0,
        t_grid);
    const double ratio = err_base / err_doubled;
    min_ratio = std::min(min_ratio, ratio);
    worst_err = std::max(worst_err, err_base);
    table.row({format_integer(c), format_integer(length), format_number(delta),
               format_number(coupling), format_number(err_base),
               format_number(err_doubled), format_number(ratio)});
  }
  d.sum.result["min_ratio"] = min_ratio;
  d.sum.result["max_err_base"] = worst_err;
  return d.finish();
}

// ---------------------------------------------------------------------------

RunSummary run_experiment(const std::string& experiment, const Json& config) {
  if (experiment == "larmor") return run_larmor(config);
  if (experiment == "exchange") return run_exchange(config);
  if (experiment == "chain") return run_chain(config);
  if (experiment == "anderson") return run_anderson(config);
  if (experiment == "detection") return run_detection(config);
  if (experiment == "rwa-check") return run_rwa_check(config);
  throw config_error("unknown experiment '" + experiment + "'");
}

}  // namespace adqc
