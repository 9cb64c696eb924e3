// Command-line front end: simulate / corrupt / identify / cluster / bench.

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include "ssikit/ssikit.hpp"

namespace fs = std::filesystem;
using namespace ssikit;

namespace {

struct GlobalOptions {
    std::string out_dir;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string format = "csv";
    bool error_json = false;
};

MdofSystem benchmark_3dof() {
    const double k = 1e4;
    const double m = 10.0;
    MdofSystem sys;
    sys.ndof = 3;
    sys.mass_matrix = m * Matrix::Identity(3, 3);
    sys.stiffness_matrix.resize(3, 3);
    sys.stiffness_matrix << 2 * k, -k, 0, -k, 4 * k, -0.5 * k, 0, -0.5 * k, k;
    sys.damping_matrix = sys.stiffness_matrix * 1e-4;
    return sys;
}

Matrix parse_square_matrix(const std::string& csv, Index n, const char* name) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    if (static_cast<Index>(values.size()) != n * n)
        throw CLI::ValidationError(std::string(name) + " needs " + std::to_string(n * n) +
                                   " comma-separated entries");
    Matrix m(n, n);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c) m(r, c) = values[static_cast<std::size_t>(r * n + c)];
    return m;
}

OutlierSpec outlier_preset(const std::string& name) {
    OutlierSpec spec;
    if (name == "random-0.1pct") {
        spec.kind = OutlierKind::RandomDropout;
        spec.rate = 0.001;
    } else if (name == "random-0.5pct") {
        spec.kind = OutlierKind::RandomDropout;
        spec.rate = 0.005;
    } else if (name == "periodic-block") {
        spec.kind = OutlierKind::PeriodicBlock;
        spec.block_duration = 0.01;
        spec.period = 1.0;
        spec.channels = {0};
    } else if (name == "clip-80") {
        spec.kind = OutlierKind::Clipping;
        spec.clip_fraction = 0.8;
    } else if (name == "zero-block") {
        spec.kind = OutlierKind::ZeroBlock;
        spec.start = 3.0;
        spec.duration = 1.0;
        spec.channels = {0};
    } else {
        throw CLI::ValidationError("unknown outlier preset '" + name + "'");
    }
    return spec;
}

void require_input(const fs::path& path) {
    if (!fs::exists(path)) throw std::system_error(ENOENT, std::generic_category(), path.string());
}

/// Sweep orders one by one; a degenerate order is reported and skipped so it
/// cannot abort a whole diagram.
std::vector<ModalSet> sweep_orders(const MultiChannelRecord& record, Index j,
                                   const std::vector<Index>& orders, SsiMethod method,
                                   const EmConfig& em, int* failures = nullptr) {
    std::vector<ModalSet> sets;
    for (Index order : orders) {
        try {
            std::vector<ModalSet> one = run_ssi(record, j, {order}, method, em);
            sets.push_back(std::move(one.front()));
        } catch (const std::exception& e) {
            if (failures) ++*failures;
            std::cerr << "warning: " << e.what() << " (order skipped)\n";
        }
    }
    return sets;
}

int cmd_simulate(const GlobalOptions& global, const std::string& preset, Index ndof,
                 const std::string& mass_csv, const std::string& stiffness_csv,
                 const std::string& damping_csv, const SimulationConfig& config,
                 const std::string& prefix) {
    MdofSystem sys;
    if (!mass_csv.empty() || !stiffness_csv.empty() || !damping_csv.empty()) {
        if (ndof < 1) throw CLI::ValidationError("--ndof is required with explicit matrices");
        sys.ndof = ndof;
        sys.mass_matrix = parse_square_matrix(mass_csv, ndof, "--mass");
        sys.stiffness_matrix = parse_square_matrix(stiffness_csv, ndof, "--stiffness");
        sys.damping_matrix = damping_csv.empty()
                                 ? Matrix::Zero(ndof, ndof)
                                 : parse_square_matrix(damping_csv, ndof, "--damping");
    } else if (preset == "benchmark-3dof") {
        sys = benchmark_3dof();
    } else {
        throw CLI::ValidationError("unknown system preset '" + preset + "'");
    }

    MultiChannelRecord record = simulate_response(sys, config);
    ModalSet truth = ground_truth_modal(sys);

    fs::path out_dir(global.out_dir);
    fs::create_directories(out_dir);
    write_record_csv(out_dir / (prefix + "record.csv"), record);
    atomic_write(out_dir / (prefix + "truth.json"),
                 [&](std::ofstream& out) { out << modal_set_to_json(truth).dump(2) << "\n"; });
    std::cout << "wrote " << (out_dir / (prefix + "record.csv")).string() << " ("
              << record.channels() << "x" << record.samples() << ", dt=" << record.dt << ")\n";
    return 0;
}

int cmd_corrupt(const GlobalOptions& global, const std::string& input, const OutlierSpec& spec,
                const std::string& prefix) {
    require_input(input);
    MultiChannelRecord record = read_record_csv(input);
    auto [corrupted, mask] = inject_outliers(record, spec);

    fs::path out_dir(global.out_dir);
    fs::create_directories(out_dir);
    write_record_csv(out_dir / (prefix + "corrupted.csv"), corrupted);
    write_mask_csv(out_dir / (prefix + "mask.csv"), mask, record.dt);
    std::cout << "wrote " << (out_dir / (prefix + "corrupted.csv")).string() << " ("
              << mask.count() << " samples corrupted)\n";
    return 0;
}

int cmd_identify(const GlobalOptions& global, const std::string& input, Index j,
                 const std::vector<Index>& orders, const std::string& method,
                 const ConsistencyCriteria& criteria, const EmConfig& em,
                 const std::string& prefix) {
    require_input(input);
    MultiChannelRecord record = read_record_csv(input);
    SsiMethod m = method == "robust" ? SsiMethod::Robust : SsiMethod::Cov;

    int failures = 0;
    std::vector<ModalSet> sets = sweep_orders(record, j, orders, m, em, &failures);
    if (sets.empty()) throw std::runtime_error("identify: every requested order failed");

    ConsistencyDiagram diagram = build_diagram(sets, criteria);
    if (record.samples() >= 1024) {
        Index nperseg = 1024;
        while (nperseg * 2 <= std::min<Index>(record.samples(), 8192)) nperseg *= 2;
        PowerSpectrum spectrum = welch_psd(record, nperseg);
        for (Index b = 0; b < spectrum.frequencies.size(); ++b)
            diagram.spectrum.emplace_back(spectrum.frequencies(b), spectrum.power(b));
    }

    fs::path out_dir(global.out_dir);
    fs::create_directories(out_dir);
    write_modal_sets_json(out_dir / (prefix + "modal_sets.json"), sets);
    write_diagram_tsv(out_dir / (prefix + "diagram.tsv"), diagram);
    write_plot_file(out_dir / (prefix + "diagram_plot.tsv"), diagram);
    if (global.format == "json") {
        nlohmann::json jd = nlohmann::json::array();
        for (const PoleRecord& r : diagram.records)
            jd.push_back({{"order", r.order},
                          {"freq_hz", r.freq_hz},
                          {"zeta", r.zeta},
                          {"freq_stable", r.freq_stable},
                          {"damp_stable", r.damp_stable},
                          {"shape_stable", r.shape_stable},
                          {"fully_consistent", r.fully_consistent()}});
        atomic_write(out_dir / (prefix + "diagram.json"),
                     [&](std::ofstream& out) { out << jd.dump(2) << "\n"; });
    }
    std::cout << "wrote " << (out_dir / (prefix + "diagram.tsv")).string() << " (" << sets.size()
              << " orders, " << failures << " skipped)\n";
    return 0;
}

int cmd_cluster(const GlobalOptions& global, const std::vector<std::string>& inputs,
                const std::vector<double>& timestamps, const ClusteringConfig& config,
                const ConsistencyCriteria& criteria, const std::string& prefix) {
    for (const std::string& in : inputs) require_input(in);
    if (!timestamps.empty() && timestamps.size() != inputs.size())
        throw CLI::ValidationError("--timestamps must match the number of inputs");

    std::vector<std::pair<double, std::vector<ModalSet>>> datasets;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        double ts = timestamps.empty() ? static_cast<double>(i) : timestamps[i];
        datasets.emplace_back(ts, read_modal_sets_json(inputs[i]));
    }
    std::vector<TrendRow> trend;
    for (const auto& [ts, sweep] : datasets) {
        if (sweep.empty()) {
            trend.push_back({ts, {}});  // empty diagram still gets its row
        } else {
            trend.push_back(temporal_trend({{ts, sweep}}, config, criteria).front());
        }
    }

    nlohmann::json all = nlohmann::json::array();
    for (const auto& [ts, sweep] : datasets) {
        ConsistencyDiagram diagram = build_diagram(sweep, criteria);
        nlohmann::json entry;
        entry["timestamp"] = ts;
        entry["clusters"] = nlohmann::json::array();
        if (!diagram.records.empty()) {
            for (const PoleCluster& c : dbscan(diagram.records, config)) {
                nlohmann::json jc;
                jc["label"] = c.label;
                jc["members"] = c.members;
                jc["center_freq_hz"] = c.center_freq_hz;
                jc["center_zeta"] = c.center_zeta;
                entry["clusters"].push_back(std::move(jc));
            }
        }
        all.push_back(std::move(entry));
    }

    fs::path out_dir(global.out_dir);
    fs::create_directories(out_dir);
    atomic_write(out_dir / (prefix + "clusters.json"),
                 [&](std::ofstream& out) { out << all.dump(2) << "\n"; });
    write_trend_csv(out_dir / (prefix + "trend.csv"), trend);
    std::cout << "wrote " << (out_dir / (prefix + "trend.csv")).string() << " (" << trend.size()
              << " rows)\n";
    return 0;
}

struct BenchTrial {
    bool cov_ok = false;
    bool robust_ok = false;
    std::vector<double> cov_freqs;
    std::vector<double> robust_freqs;
};

int cmd_bench(const GlobalOptions& global, const std::string& study, int trials, Index order,
              Index j, const std::string& outlier_preset_name, const EmConfig& em,
              const std::string& prefix) {
    if (trials < 1) throw CLI::ValidationError("--trials must be >= 1");
    MdofSystem sys = benchmark_3dof();
    const Index pairs = order / 2;

    auto pair_freqs = [pairs](const ModalSet& set) {
        std::vector<double> f;
        for (std::size_t i = 0; i < set.frequencies.size(); ++i)
            if (!set.spurious[i]) f.push_back(set.frequencies[i]);
        std::sort(f.begin(), f.end());
        if (static_cast<Index>(f.size()) != pairs) f.clear();
        return f;
    };

    // per-trial seeds fixed up front, so the results do not depend on --jobs
    std::vector<BenchTrial> results(static_cast<std::size_t>(trials));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            int t = next.fetch_add(1);
            if (t >= trials) return;
            SimulationConfig cfg;
            cfg.seed = global.seed + static_cast<std::uint64_t>(t);
            cfg.burn_in = 60000;
            MultiChannelRecord record = simulate_response(sys, cfg);
            if (study == "corrupted") {
                OutlierSpec spec = outlier_preset(outlier_preset_name);
                spec.seed = global.seed + 100000 + static_cast<std::uint64_t>(t);
                record = inject_outliers(record, spec).first;
            }
            BenchTrial& trial = results[static_cast<std::size_t>(t)];
            try {
                std::vector<ModalSet> sets = run_ssi(record, j, {order}, SsiMethod::Cov);
                trial.cov_freqs = pair_freqs(sets.front());
                trial.cov_ok = !trial.cov_freqs.empty();
            } catch (const std::exception&) {
            }
            try {
                EmConfig cfg_em = em;
                cfg_em.seed = global.seed + 200000 + static_cast<std::uint64_t>(t);
                std::vector<ModalSet> sets = run_ssi(record, j, {order}, SsiMethod::Robust, cfg_em);
                trial.robust_freqs = pair_freqs(sets.front());
                trial.robust_ok = !trial.robust_freqs.empty();
            } catch (const std::exception&) {
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::max(1, global.jobs); ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();

    fs::path out_dir(global.out_dir);
    fs::create_directories(out_dir);
    atomic_write(out_dir / (prefix + "bench_estimates.csv"), [&](std::ofstream& out) {
        out << "trial,method,status";
        for (Index p = 0; p < pairs; ++p) out << ",f" << p + 1;
        out << "\n";
        for (int t = 0; t < trials; ++t) {
            const BenchTrial& trial = results[static_cast<std::size_t>(t)];
            auto row = [&](const char* method, bool ok, const std::vector<double>& f) {
                out << t << ',' << method << ',' << (ok ? "ok" : "failed");
                for (Index p = 0; p < pairs; ++p)
                    out << ','
                        << (ok ? format_double(f[static_cast<std::size_t>(p)]) : std::string());
                out << "\n";
            };
            row("cov", trial.cov_ok, trial.cov_freqs);
            row("robust", trial.robust_ok, trial.robust_freqs);
        }
    });

    auto summarize = [&](bool BenchTrial::* ok, std::vector<double> BenchTrial::* freqs) {
        std::vector<std::pair<double, double>> stats;
        for (Index p = 0; p < pairs; ++p) {
            std::vector<double> values;
            for (const BenchTrial& trial : results)
                if (trial.*ok) values.push_back((trial.*freqs)[static_cast<std::size_t>(p)]);
            double mean = 0.0, sd = 0.0;
            for (double v : values) mean += v;
            if (!values.empty()) mean /= static_cast<double>(values.size());
            for (double v : values) sd += (v - mean) * (v - mean);
            sd = values.size() > 1 ? std::sqrt(sd / static_cast<double>(values.size() - 1)) : 0.0;
            stats.emplace_back(mean, sd);
        }
        return stats;
    };
    auto cov_stats = summarize(&BenchTrial::cov_ok, &BenchTrial::cov_freqs);
    auto robust_stats = summarize(&BenchTrial::robust_ok, &BenchTrial::robust_freqs);
    int cov_ok = 0, robust_ok = 0;
    for (const BenchTrial& trial : results) {
        cov_ok += trial.cov_ok;
        robust_ok += trial.robust_ok;
    }

    atomic_write(out_dir / (prefix + "bench_summary.csv"), [&](std::ofstream& out) {
        out << "method,pole,mean_freq_hz,std_freq_hz,trials_ok\n";
        for (Index p = 0; p < pairs; ++p) {
            out << "cov," << p + 1 << ',' << format_double(cov_stats[static_cast<std::size_t>(p)].first)
                << ',' << format_double(cov_stats[static_cast<std::size_t>(p)].second) << ','
                << cov_ok << "\n";
            out << "robust," << p + 1 << ','
                << format_double(robust_stats[static_cast<std::size_t>(p)].first) << ','
                << format_double(robust_stats[static_cast<std::size_t>(p)].second) << ','
                << robust_ok << "\n";
        }
    });
    std::cout << "wrote " << (out_dir / (prefix + "bench_summary.csv")).string() << " (" << trials
              << " trials, study=" << study << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic subspace identification toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value configuration file; flags win");

    GlobalOptions global;
    const char* env_out = std::getenv("SSIKIT_OUT_DIR");
    global.out_dir = env_out ? env_out : ".";
    app.add_option("--out-dir", global.out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", global.seed, "base random seed")->capture_default_str();
    app.add_option("--jobs", global.jobs, "worker threads for bench")->capture_default_str();
    app.add_option("--format", global.format, "extra diagram output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_flag("--error-json", global.error_json, "emit a JSON error object on failure");

    // simulate -----------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "generate MDOF response data");
    std::string sim_preset = "benchmark-3dof";
    std::string mass_csv, stiffness_csv, damping_csv, sim_prefix;
    std::string output_quantity = "displacement";
    Index ndof = 0;
    SimulationConfig sim_cfg;
    sim->add_option("--preset", sim_preset, "system preset")->capture_default_str();
    sim->add_option("--ndof", ndof, "degrees of freedom for explicit matrices");
    sim->add_option("--mass", mass_csv, "row-major mass matrix entries");
    sim->add_option("--stiffness", stiffness_csv, "row-major stiffness matrix entries");
    sim->add_option("--damping", damping_csv, "row-major damping matrix entries");
    sim->add_option("--sample-rate", sim_cfg.sample_rate, "Hz")->capture_default_str();
    sim->add_option("--num-samples", sim_cfg.num_samples)->capture_default_str();
    sim->add_option("--forcing-std", sim_cfg.forcing_std, "scaled by 1e-2 when applied")
        ->capture_default_str();
    sim->add_option("--burn-in", sim_cfg.burn_in, "leading samples to discard")
        ->capture_default_str();
    sim->add_option("--output", output_quantity, "displacement|acceleration")
        ->check(CLI::IsMember({"displacement", "acceleration"}))
        ->capture_default_str();
    sim->add_option("--prefix", sim_prefix, "output filename prefix");

    // corrupt ------------------------------------------------------------
    auto* cor = app.add_subcommand("corrupt", "inject outliers into a record");
    std::string cor_input, cor_preset = "random-0.1pct", cor_prefix, cor_kind;
    OutlierSpec cor_flags;
    std::vector<Index> cor_channels;
    cor->add_option("--input", cor_input, "record CSV")->required();
    cor->add_option("--preset", cor_preset, "outlier preset")->capture_default_str();
    cor->add_option("--kind", cor_kind,
                    "random-dropout|periodic-block|clipping|zero-block (overrides preset)");
    cor->add_option("--rate", cor_flags.rate);
    cor->add_option("--pinned-value", cor_flags.pinned_value);
    cor->add_option("--noise-std", cor_flags.noise_std);
    cor->add_option("--block-duration", cor_flags.block_duration);
    cor->add_option("--period", cor_flags.period);
    cor->add_option("--clip-fraction", cor_flags.clip_fraction);
    cor->add_option("--start", cor_flags.start);
    cor->add_option("--duration", cor_flags.duration);
    cor->add_option("--channels", cor_channels, "channel indices (default all)");
    cor->add_option("--prefix", cor_prefix, "output filename prefix");

    // identify -----------------------------------------------------------
    auto* ident = app.add_subcommand("identify", "run the SSI pipeline over model orders");
    std::string ident_input, ident_method = "cov", ident_prefix;
    Index ident_j = 10, min_order = 2, max_order = 30, order_step = 2;
    std::vector<Index> ident_orders;
    ConsistencyCriteria criteria;
    EmConfig em;
    em.rel_tol = 1e-5;  // operational default; the library default is tighter
    em.max_iters = 200;
    ident->add_option("--input", ident_input, "record CSV")->required();
    ident->add_option("--j", ident_j, "block rows per Hankel half")->capture_default_str();
    ident->add_option("--method", ident_method)
        ->check(CLI::IsMember({"cov", "robust"}))
        ->capture_default_str();
    ident->add_option("--min-order", min_order)->capture_default_str();
    ident->add_option("--max-order", max_order)->capture_default_str();
    ident->add_option("--order-step", order_step)->capture_default_str();
    ident->add_option("--orders", ident_orders, "explicit order list (overrides range)");
    ident->add_option("--freq-tol", criteria.freq_rel_tol)->capture_default_str();
    ident->add_option("--damp-tol", criteria.damp_abs_tol)->capture_default_str();
    ident->add_option("--mac-min", criteria.mac_min)->capture_default_str();
    ident->add_option("--em-max-iters", em.max_iters)->capture_default_str();
    ident->add_option("--em-tol", em.rel_tol)->capture_default_str();
    ident->add_option("--nu-init", em.nu_init)->capture_default_str();
    ident->add_option("--perturbation-std", em.perturbation_std)->capture_default_str();
    ident->add_option("--em-trace", em.trace_path, "per-iteration trace CSV");
    ident->add_option("--prefix", ident_prefix, "output filename prefix");

    // cluster ------------------------------------------------------------
    auto* clus = app.add_subcommand("cluster", "cluster poles and extract temporal trends");
    std::vector<std::string> clus_inputs;
    std::vector<double> clus_timestamps;
    std::string clus_prefix;
    ClusteringConfig clus_cfg;
    ConsistencyCriteria clus_criteria;
    clus->add_option("--inputs", clus_inputs, "modal_sets.json files")->required();
    clus->add_option("--timestamps", clus_timestamps, "one per input (default 0,1,...)");
    clus->add_option("--eps", clus_cfg.eps)->capture_default_str();
    clus->add_option("--min-pts", clus_cfg.min_pts)->capture_default_str();
    clus->add_option("--freq-tol", clus_criteria.freq_rel_tol)->capture_default_str();
    clus->add_option("--damp-tol", clus_criteria.damp_abs_tol)->capture_default_str();
    clus->add_option("--mac-min", clus_criteria.mac_min)->capture_default_str();
    clus->add_option("--prefix", clus_prefix, "output filename prefix");

    // bench --------------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "seeded variance studies at a fixed order");
    std::string bench_study = "clean", bench_outliers = "random-0.1pct", bench_prefix;
    int bench_trials = 100;
    Index bench_order = 6, bench_j = 10;
    EmConfig bench_em;
    bench_em.rel_tol = 1e-5;
    bench_em.max_iters = 200;
    bench->add_option("--study", bench_study)
        ->check(CLI::IsMember({"clean", "corrupted"}))
        ->capture_default_str();
    bench->add_option("--trials", bench_trials)->capture_default_str();
    bench->add_option("--order", bench_order)->capture_default_str();
    bench->add_option("--j", bench_j)->capture_default_str();
    bench->add_option("--outlier-preset", bench_outliers)->capture_default_str();
    bench->add_option("--em-max-iters", bench_em.max_iters)->capture_default_str();
    bench->add_option("--em-tol", bench_em.rel_tol)->capture_default_str();
    bench->add_option("--prefix", bench_prefix, "output filename prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) {
            sim_cfg.seed = global.seed;
            sim_cfg.output = output_quantity == "acceleration" ? OutputQuantity::Acceleration
                                                               : OutputQuantity::Displacement;
            return cmd_simulate(global, sim_preset, ndof, mass_csv, stiffness_csv, damping_csv,
                                sim_cfg, sim_prefix);
        }
        if (cor->parsed()) {
            OutlierSpec spec = outlier_preset(cor_preset);
            if (!cor_kind.empty()) {
                if (cor_kind == "random-dropout") spec.kind = OutlierKind::RandomDropout;
                else if (cor_kind == "periodic-block") spec.kind = OutlierKind::PeriodicBlock;
                else if (cor_kind == "clipping") spec.kind = OutlierKind::Clipping;
                else if (cor_kind == "zero-block") spec.kind = OutlierKind::ZeroBlock;
                else throw CLI::ValidationError("unknown --kind '" + cor_kind + "'");
            }
            if (cor->count("--rate")) spec.rate = cor_flags.rate;
            if (cor->count("--pinned-value")) spec.pinned_value = cor_flags.pinned_value;
            if (cor->count("--noise-std")) spec.noise_std = cor_flags.noise_std;
            if (cor->count("--block-duration")) spec.block_duration = cor_flags.block_duration;
            if (cor->count("--period")) spec.period = cor_flags.period;
            if (cor->count("--clip-fraction")) spec.clip_fraction = cor_flags.clip_fraction;
            if (cor->count("--start")) spec.start = cor_flags.start;
            if (cor->count("--duration")) spec.duration = cor_flags.duration;
            if (cor->count("--channels")) spec.channels = cor_channels;
            spec.seed = global.seed;
            return cmd_corrupt(global, cor_input, spec, cor_prefix);
        }
        if (ident->parsed()) {
            em.seed = global.seed;
            std::vector<Index> orders = ident_orders;
            if (orders.empty())
                for (Index o = min_order; o <= max_order; o += order_step) orders.push_back(o);
            return cmd_identify(global, ident_input, ident_j, orders, ident_method, criteria, em,
                                ident_prefix);
        }
        if (clus->parsed())
            return cmd_cluster(global, clus_inputs, clus_timestamps, clus_cfg, clus_criteria,
                               clus_prefix);
        if (bench->parsed())
            return cmd_bench(global, bench_study, bench_trials, bench_order, bench_j,
                             bench_outliers, bench_em, bench_prefix);
    } catch (const std::system_error& e) {
        if (global.error_json)
            std::cout << nlohmann::json{{"error", e.what()}, {"exit_code", 2}}.dump() << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::ValidationError& e) {
        if (global.error_json)
            std::cout << nlohmann::json{{"error", e.what()}, {"exit_code", 2}}.dump() << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        if (global.error_json)
            std::cout << nlohmann::json{{"error", e.what()}, {"exit_code", 1}}.dump() << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
