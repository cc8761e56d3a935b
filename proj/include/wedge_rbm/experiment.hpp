#pragma once

// Experiment orchestration: the per-command pipelines behind the CLI and the
// acceptance suite. Everything is a deterministic function of the config.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "wedge_rbm/config.hpp"
#include "wedge_rbm/decomposition.hpp"
#include "wedge_rbm/excursions.hpp"
#include "wedge_rbm/parallel.hpp"
#include "wedge_rbm/simulator.hpp"
#include "wedge_rbm/skorokhod.hpp"
#include "wedge_rbm/stats.hpp"
#include "wedge_rbm/time_change.hpp"
#include "wedge_rbm/variation.hpp"

namespace wedge_rbm {

inline SimParams sim_params(const ExperimentConfig& c, const WedgeConfig& cfg) {
    SimParams p;
    p.z0 = c.z0;
    p.dt = c.dt;
    p.t_end = c.t_end;
    p.seed = c.seed;
    p.vertex_cone = c.cone(cfg);
    return p;
}

inline std::vector<PathBundle> simulate_paths(const ExperimentConfig& c) {
    const WedgeConfig cfg = c.wedge();
    return batch_simulate(cfg, sim_params(c, cfg), c.n_paths, c.threads);
}

inline HillOptions hill_options(const ExperimentConfig& c) {
    HillOptions h;
    h.fraction = c.hill_fraction;
    h.bootstrap = c.bootstrap;
    h.seed = c.seed;
    return h;
}

/// Dyadic strides used for energy and p-variation refinement, coarsest first.
inline constexpr std::array<std::size_t, 7> kDyadicStrides{64, 32, 16, 8, 4, 2, 1};

// ---------------------------------------------------------------------------
// Acceptance criteria

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

struct AcceptanceReport {
    std::vector<CriterionResult> criteria;
    double wall_seconds = 0.0;

    bool all_pass() const {
        return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& r) { return r.pass; });
    }
};

namespace detail {

inline std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s << std::setprecision(digits) << v;
    return s.str();
}

inline double elapsed(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

/// Per-path quantities shared by several criteria.
struct PathWork {
    Decomposition dec;
    ExcursionSet exc;  // jumps from the simulator's Y = Z - X
    std::array<double, kDyadicStrides.size()> energy{};
    double v18_fine = 0.0, v18_half = 0.0;
    double v12_fine = 0.0, v12_coarse = 0.0;
    double x_hat_error = 0.0;
};

}  // namespace detail

/// Evaluates acceptance criteria 1 to 10 on the configuration. The config is
/// expected to describe the reference setup; criterion 5 additionally runs
/// the normal-reflection control (theta1 = theta2 = 0) on the same wedge.
inline AcceptanceReport run_acceptance(const ExperimentConfig& c, std::ostream* log = nullptr) {
    using detail::fmt;
    const auto start = std::chrono::steady_clock::now();
    auto note = [&](const std::string& s) {
        if (log) *log << s << std::endl;
    };
    AcceptanceReport report;
    auto add = [&](int id, std::string name, bool pass, std::string detail) {
        report.criteria.push_back({id, std::move(name), pass, std::move(detail)});
        note("  criterion " + std::to_string(id) + (pass ? " PASS" : " FAIL") + ": " + report.criteria.back().detail);
    };

    const WedgeConfig cfg = c.wedge();
    const unsigned threads = resolve_thread_count(c.threads);
    const double eps = c.eps();
    const HillOptions hill = hill_options(c);

    // 1. duration index (timed end to end: simulation, excursions, estimate)
    note("simulating " + std::to_string(c.n_paths) + " reference paths");
    const std::vector<PathBundle> paths = simulate_paths(c);
    const std::size_t n = paths.size();
    std::vector<detail::PathWork> work(n);
    parallel_for(n, threads, [&](std::size_t i) {
        work[i].exc = excursions(paths[i].times, paths[i].z, eps);
        attach_jumps(work[i].exc, paths[i].y());
    });
    std::vector<double> durations, jump_norms;
    for (const auto& w : work) {
        for (double d : complete_durations(w.exc)) durations.push_back(d);
        for (double j : complete_jump_norms(w.exc)) jump_norms.push_back(j);
    }
    {
        const TailIndexEstimate e = duration_tail_index(durations, hill);
        const double secs = detail::elapsed(start);
        add(1, "stable duration index", e.estimate >= 0.60 && e.estimate <= 0.90 && secs <= 300.0,
            "Hill " + fmt(e.estimate) + " CI [" + fmt(e.ci_lo) + ", " + fmt(e.ci_hi) + "] n=" + std::to_string(e.n) +
                " band [0.60, 0.90]; regression " + fmt(e.regression_estimate) + "; " + fmt(secs, 3) + " s");
    }

    // 2. jump index
    {
        const TailIndexEstimate e = stable_jump_index(jump_norms, hill);
        add(2, "stable jump index", e.estimate >= 1.25 && e.estimate <= 1.75,
            "Hill " + fmt(e.estimate) + " CI [" + fmt(e.ci_lo) + ", " + fmt(e.ci_hi) + "] n=" + std::to_string(e.n) +
                " band [1.25, 1.75]; regression " + fmt(e.regression_estimate));
    }

    // Decomposition and variation work, per path.
    note("extracting martingale parts");
    parallel_for(n, threads, [&](std::size_t i) {
        detail::PathWork& w = work[i];
        const PathBundle& p = paths[i];
        w.dec = extract_martingale_part(p, cfg, c.delta0, c.delta_ratio, c.delta_levels);
        const std::span<const Vec2> y = w.dec.y_hat;
        for (std::size_t s = 0; s < kDyadicStrides.size(); ++s) w.energy[s] = energy_sum(y, kDyadicStrides[s]);
        const std::vector<Vec2> half = subsample(y, 2);
        const std::vector<Vec2> coarse = subsample(y, kDyadicStrides.front());
        w.v18_fine = strong_p_variation(y, 1.8);
        w.v18_half = strong_p_variation(half, 1.8);
        w.v12_fine = strong_p_variation(y, 1.2);
        w.v12_coarse = strong_p_variation(coarse, 1.2);
    });

    // 3. zero-energy trend
    {
        std::vector<double> med;
        for (std::size_t s = 0; s < kDyadicStrides.size(); ++s) {
            std::vector<double> v;
            for (const auto& w : work) v.push_back(w.energy[s]);
            med.push_back(stats::median(v));
        }
        int decreases = 0;
        std::string seq;
        for (std::size_t s = 0; s < med.size(); ++s) {
            if (s > 0 && med[s] < med[s - 1]) ++decreases;
            seq += (s ? " " : "") + fmt(med[s]);
        }
        const double ratio = med.back() / med.front();
        add(3, "zero-energy trend", decreases >= 5 && ratio < 0.2,
            "median energy strides 64..1: " + seq + "; decreasing steps " + std::to_string(decreases) +
                "/6 (need 5); final/coarsest " + fmt(ratio) + " (need < 0.2)");
    }

    // 4. p-variation dichotomy
    {
        std::vector<double> r18, f12, c12;
        for (const auto& w : work) {
            r18.push_back(w.v18_fine / w.v18_half);
            f12.push_back(w.v12_fine);
            c12.push_back(w.v12_coarse);
        }
        const double m18 = stats::median(r18);
        const double mf = stats::median(f12), mc = stats::median(c12);
        add(4, "p-variation dichotomy", m18 >= 0.5 && m18 <= 2.0 && mf > 3.0 * mc,
            "p=1.8 median finest/next ratio " + fmt(m18) + " (need [0.5, 2]); p=1.2 median finest " + fmt(mf) +
                " vs 3x coarsest " + fmt(3.0 * mc));
    }

    // 5. Doob-Meyer extraction
    {
        ExperimentConfig control = c;
        control.theta1 = 0.0;
        control.theta2 = 0.0;
        note("simulating normal-reflection control");
        const WedgeConfig ccfg = control.wedge();
        const std::vector<PathBundle> cpaths = simulate_paths(control);
        std::vector<double> sup(cpaths.size());
        parallel_for(cpaths.size(), threads, [&](std::size_t i) {
            const Decomposition d =
                extract_martingale_part(cpaths[i], ccfg, c.delta0, c.delta_ratio, c.delta_levels);
            double s = 0.0;
            for (std::size_t k = 0; k < cpaths[i].size(); ++k) s = std::max(s, norm(d.x_hat[k] - cpaths[i].x[k]));
            sup[i] = s;
        });
        const double med_sup = stats::median(sup);
        const double target = 5.0 * std::sqrt(c.dt);

        std::vector<double> qx, qy, cross;
        for (const auto& w : work) {
            const BmStatistics b = bm_diagnostics(w.dec.x_hat);
            qx.push_back(b.qv_x);
            qy.push_back(b.qv_y);
            cross.push_back(b.cross_qv);
        }
        const double T = c.t_end;
        const double mqx = stats::median(qx), mqy = stats::median(qy);
        const double mc = stats::mean(cross);
        const double se = cross.size() > 1 ? stats::standard_error(cross) : std::abs(mc);
        const bool qv_ok = mqx >= 0.9 * T && mqx <= 1.1 * T && mqy >= 0.9 * T && mqy <= 1.1 * T;
        const bool cross_ok = std::abs(mc) <= 3.0 * se;
        add(5, "Doob-Meyer extraction", med_sup < target && qv_ok && cross_ok,
            "control median sup|X_hat - x| " + fmt(med_sup) + " (need < " + fmt(target) + "); reference median QV " +
                fmt(mqx) + ", " + fmt(mqy) + " (need [" + fmt(0.9 * T) + ", " + fmt(1.1 * T) +
                "]); mean cross-QV " + fmt(mc) + " vs 3 SE " + fmt(3.0 * se));
    }

    // 6. Cauchy bound on the squared norm; per-coordinate means are reported too
    {
        const int L = c.delta_levels;
        bool ok = true;
        std::string text;
        for (int l = 0; l + 1 < L; ++l) {
            double e1 = 0.0, e2 = 0.0, occ = 0.0;
            for (const auto& w : work) {
                const Vec2 d = w.dec.w_terminal[l + 1] - w.dec.w_terminal[l];
                e1 += d.x * d.x;
                e2 += d.y * d.y;
                occ += w.dec.occupation_diag[l];
            }
            e1 /= static_cast<double>(n);
            e2 /= static_cast<double>(n);
            occ /= static_cast<double>(n);
            const bool level_ok = e1 + e2 <= 1.2 * occ;
            ok = ok && level_ok;
            text += (l ? "; " : "") + std::string("levels ") + std::to_string(l + 1) + "-" + std::to_string(l + 2) +
                    ": E|dW|^2 " + fmt(e1 + e2) + " vs 1.2 occ " + fmt(1.2 * occ) + " (E dW1^2 " + fmt(e1) +
                    ", E dW2^2 " + fmt(e2) + ")";
        }
        add(6, "Cauchy bound", ok, text);
    }

    // 7. SP on excursions longer than 100 dt
    {
        std::size_t total = 0, passed = 0, identity_bad = 0;
        std::mutex mu;
        parallel_for(n, threads, [&](std::size_t i) {
            const PathBundle& p = paths[i];
            const std::vector<Vec2> y = p.y();
            std::size_t t = 0, ps = 0, bad = 0;
            for (const Excursion& e : work[i].exc.intervals) {
                if (!e.complete() || e.duration <= 100.0 * c.dt) continue;
                ++t;
                const SPReport r = check_sp(p.z, y, p.x, cfg, e.g_index, e.d_index, c.band, c.tolerances);
                if (r.pass) {
                    ++ps;
                    if (r.variation_identity_residual > 0.02) ++bad;
                }
            }
            std::lock_guard lock(mu);
            total += t;
            passed += ps;
            identity_bad += bad;
        });
        const double frac = total ? static_cast<double>(passed) / static_cast<double>(total) : 0.0;
        add(7, "SP on excursions", total > 0 && frac >= 0.95 && identity_bad == 0,
            std::to_string(passed) + "/" + std::to_string(total) + " excursions pass (" + fmt(100 * frac) +
                "%, need 95%); V1 identity off by > 2% on " + std::to_string(identity_bad) + " passing");
    }

    // 8. ESP structural test
    {
        const VertexCone bis = VertexCone::bisector(cfg);
        std::vector<char> ok(n, 0);
        parallel_for(n, threads, [&](std::size_t i) {
            const std::vector<Vec2> y = paths[i].y();
            ok[i] = check_esp(paths[i].z, y, paths[i].x, cfg, bis, c.band, c.tolerances, c.esp_anchors).pass;
        });
        const auto passed = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
        const double frac = static_cast<double>(passed) / static_cast<double>(n);
        const bool h_zero = hull_is_full(VertexCone::zero(), cfg);
        const bool h_bis = hull_is_full(bis, cfg);
        const bool h_full = hull_is_full(VertexCone::full_plane(), cfg);
        add(8, "ESP structural test", frac >= 0.95 && !h_zero && h_bis && h_full,
            std::to_string(passed) + "/" + std::to_string(n) + " paths pass with bisector V (need 95%); hull_is_full " +
                "zero=" + (h_zero ? "true" : "false") + " bisector=" + (h_bis ? "true" : "false") +
                " full=" + (h_full ? "true" : "false"));
    }

    // 9. exact DP against exhaustive search
    {
        SequentialRng rng(c.seed, 0xd9);
        std::size_t mismatches = 0, cases = 0;
        double worst = 0.0;
        for (int t = 0; t < 500; ++t) {
            const std::size_t m = 2 + static_cast<std::size_t>(rng.uniform() * 11.0);
            std::vector<Vec2> pts(m);
            for (Vec2& v : pts) v = {rng.normal(), rng.normal()};
            for (double p : {1.0, 1.5, 2.0, 3.0}) {
                ++cases;
                const double a = strong_p_variation(pts, p);
                const double b = brute_force_p_variation(pts, p);
                if (a != b) ++mismatches;
                worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
            }
        }
        add(9, "exact-algorithm oracle", mismatches == 0,
            std::to_string(cases - mismatches) + "/" + std::to_string(cases) +
                " cases bit-identical; worst relative gap " + fmt(worst));
    }

    // 10. Hoelder factorization and phi_{p,q} monotonicity
    {
        const double p = 1.8;
        const std::size_t holder_paths = std::min<std::size_t>(n, 10);
        std::vector<double> holder(holder_paths);
        parallel_for(holder_paths, threads, [&](std::size_t i) {
            const std::vector<Vec2> sub = subsample<Vec2>(work[i].dec.y_hat, 4);
            holder[i] = holder_reparam(sub, p).holder_constant;
        });
        std::vector<double> neg(n, 0.0);
        std::vector<std::size_t> dropped(n, 0);
        std::vector<std::string> errors(n);
        parallel_for(n, threads, [&](std::size_t i) {
            try {
                ExcursionSet e = excursions(paths[i].times, paths[i].z, eps);
                dropped[i] = drop_degenerate_excursions(e, work[i].dec.y_hat);
                const LocalTimeCurve L = local_time_curve(paths[i].times, e, c.s0);
                const InverseLocalTime inv = inverse_local_time(L, e);
                const TimeChange tc =
                    build_phi_pq(paths[i].times, paths[i].z, work[i].dec.y_hat, e, L, inv, p, c.q);
                neg[i] = tc.max_negative_increment();
            } catch (const Error& ex) {
                errors[i] = ex.what();
            }
        });
        const double h_max = *std::max_element(holder.begin(), holder.end());
        const double worst_neg = *std::min_element(neg.begin(), neg.end());
        std::size_t n_err = 0, n_drop = 0;
        for (std::size_t i = 0; i < n; ++i) {
            n_err += errors[i].empty() ? 0 : 1;
            n_drop += dropped[i];
        }
        add(10, "Hoelder factorization", h_max <= 1.0 + 1e-9 && worst_neg >= -1e-12 && n_err == 0,
            "max Hoelder constant " + fmt(h_max, 12) + " over " + std::to_string(holder_paths) +
                " paths (need <= 1 + 1e-9); phi_{1.8," + fmt(c.q) + "} worst decrease " + fmt(worst_neg) + " over " +
                std::to_string(n) + " paths; " + std::to_string(n_drop) + " zero-variation excursions dropped; " +
                std::to_string(n_err) + " paths failed");
    }

    report.wall_seconds = detail::elapsed(start);
    return report;
}

inline void print_acceptance(std::ostream& os, const AcceptanceReport& r) {
    for (const CriterionResult& c : r.criteria)
        os << "criterion " << std::setw(2) << c.id << " [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name << ": "
           << c.detail << '\n';
}

inline void write_summary_csv(std::ostream& os, const AcceptanceReport& r) {
    os << "criterion,name,pass,detail\n";
    for (const CriterionResult& c : r.criteria) {
        std::string d = c.detail;
        std::replace(d.begin(), d.end(), '"', '\'');
        os << c.id << ',' << c.name << ',' << (c.pass ? "true" : "false") << ",\"" << d << "\"\n";
    }
}

// ---------------------------------------------------------------------------
// Commands

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"simulate", "decompose", "excursions", "indices",  "pvar",
                                                "phi",      "check-sp",  "check-esp",  "full-suite"};
    return names;
}

struct RunResult {
    int exit_code = 0;
    std::filesystem::path directory;
    std::vector<std::string> artifacts;
};

namespace detail {

inline std::string timestamp() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

inline std::filesystem::path fresh_directory(const std::filesystem::path& root, const std::string& stem) {
    std::filesystem::create_directories(root);
    std::filesystem::path dir = root / stem;
    for (int k = 1; std::filesystem::exists(dir); ++k) dir = root / (stem + "-" + std::to_string(k));
    std::filesystem::create_directories(dir);
    return dir;
}

class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::ofstream open(const std::string& name) {
        const std::filesystem::path p = dir_ / name;
        std::filesystem::create_directories(p.parent_path());
        std::ofstream f(p);
        if (!f) throw Error("cannot write " + p.string());
        names_.push_back(name);
        return f;
    }
    const std::vector<std::string>& names() const { return names_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> names_;
};

inline std::vector<Decomposition> decompose_all(const ExperimentConfig& c, const WedgeConfig& cfg,
                                                const std::vector<PathBundle>& paths) {
    std::vector<Decomposition> out(paths.size());
    parallel_for(paths.size(), resolve_thread_count(c.threads), [&](std::size_t i) {
        out[i] = extract_martingale_part(paths[i], cfg, c.delta0, c.delta_ratio, c.delta_levels);
    });
    return out;
}

inline std::vector<ExcursionSet> excursions_all(const ExperimentConfig& c, const std::vector<PathBundle>& paths) {
    std::vector<ExcursionSet> out(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        out[i] = excursions(paths[i].times, paths[i].z, c.eps());
        attach_jumps(out[i], paths[i].y());
    }
    return out;
}

}  // namespace detail

/// Runs one command, writing artifacts to <output_dir>/<command>-<timestamp>/
/// together with manifest.cfg. Returns 0 on success and 2 when full-suite
/// finds a failing criterion; errors propagate as exceptions.
inline RunResult run_experiment(const ExperimentConfig& c, const std::string& command,
                                const std::string& version = "unknown", std::ostream* log = nullptr) {
    if (std::find(commands().begin(), commands().end(), command) == commands().end())
        throw ConfigError(0, "unknown command '" + command + "'");
    validate(c);
    const auto start = std::chrono::steady_clock::now();
    const WedgeConfig cfg = c.wedge();
    RunResult result;
    detail::ArtifactWriter out(detail::fresh_directory(c.output_dir, command + "-" + detail::timestamp()));
    result.directory = out.dir();
    const bool csv = c.wants("csv");
    const bool jsonl = c.wants("jsonl");

    if (command == "full-suite") {
        const AcceptanceReport r = run_acceptance(c, log);
        if (log) print_acceptance(*log, r);
        if (csv) {
            auto f = out.open("summary.csv");
            write_summary_csv(f, r);
        }
        result.exit_code = r.all_pass() ? 0 : 2;
    } else {
        const std::vector<PathBundle> paths = simulate_paths(c);
        if (command == "simulate") {
            for (std::size_t i = 0; i < paths.size(); ++i) {
                auto f = out.open("path_" + std::to_string(i) + ".csv");
                write_path_csv(f, paths[i]);
            }
        } else if (command == "decompose") {
            const auto dec = detail::decompose_all(c, cfg, paths);
            for (std::size_t i = 0; i < dec.size(); ++i) {
                auto f = out.open("decomposition/path_" + std::to_string(i) + ".csv");
                write_decomposition_csv(f, dec[i]);
            }
            auto f = out.open("x_hat_qv.csv");
            f << "path_id,qv_x,qv_y,cross_qv,cross_qv_se,normality_p\n" << std::setprecision(17);
            for (std::size_t i = 0; i < dec.size(); ++i) {
                const BmStatistics b = bm_diagnostics(dec[i].x_hat);
                f << i << ',' << b.qv_x << ',' << b.qv_y << ',' << b.cross_qv << ',' << b.cross_qv_se << ','
                  << b.normality_p << '\n';
            }
        } else if (command == "excursions" || command == "indices") {
            const auto exc = detail::excursions_all(c, paths);
            if (command == "excursions") {
                auto f = out.open("excursions.csv");
                write_excursions_header(f);
                for (std::size_t i = 0; i < exc.size(); ++i) write_excursions_rows(f, i, exc[i]);
            } else {
                std::vector<double> d, j;
                for (const auto& e : exc) {
                    for (double v : complete_durations(e)) d.push_back(v);
                    for (double v : complete_jump_norms(e)) j.push_back(v);
                }
                const TailIndexEstimate ed = duration_tail_index(d, hill_options(c));
                const TailIndexEstimate ej = stable_jump_index(j, hill_options(c));
                auto f = out.open("indices.csv");
                write_indices_header(f);
                write_indices_row(f, "duration_hill", ed);
                write_indices_row(f, "jump_hill", ej);
                TailIndexEstimate rd = ed, rj = ej;
                rd.estimate = ed.regression_estimate;
                rj.estimate = ej.regression_estimate;
                rd.ci_lo = rd.ci_hi = rj.ci_lo = rj.ci_hi = std::nan("");
                write_indices_row(f, "duration_loglog", rd);
                write_indices_row(f, "jump_loglog", rj);
            }
        } else if (command == "pvar") {
            const auto dec = detail::decompose_all(c, cfg, paths);
            struct Row {
                double p, mesh, value;
                std::size_t level;
            };
            std::vector<std::vector<Row>> rows(paths.size());
            std::vector<std::vector<double>> energy(paths.size());
            parallel_for(paths.size(), resolve_thread_count(c.threads), [&](std::size_t i) {
                for (double p : c.p_list) {
                    const VariationReport r = variation_report(paths[i].times, dec[i].y_hat, p, kDyadicStrides);
                    for (std::size_t l = 0; l < r.levels.size(); ++l)
                        rows[i].push_back({p, r.levels[l].mesh, r.levels[l].value, l});
                }
                for (std::size_t s : kDyadicStrides) energy[i].push_back(energy_sum(dec[i].y_hat, s));
            });
            auto f = out.open("variation.csv");
            f << "path_id,p,level,mesh,value\n" << std::setprecision(17);
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (const Row& r : rows[i]) f << i << ',' << r.p << ',' << r.level << ',' << r.mesh << ',' << r.value << '\n';
            auto g = out.open("energy.csv");
            g << "path_id,stride,mesh,value\n" << std::setprecision(17);
            for (std::size_t i = 0; i < energy.size(); ++i)
                for (std::size_t s = 0; s < kDyadicStrides.size(); ++s)
                    g << i << ',' << kDyadicStrides[s] << ',' << kDyadicStrides[s] * c.dt << ',' << energy[i][s] << '\n';
        } else if (command == "phi") {
            const auto dec = detail::decompose_all(c, cfg, paths);
            const double p = *std::max_element(c.p_list.begin(), c.p_list.end());
            auto f = out.open("phi.csv");
            f << "path_id,t,phi,tag\n" << std::setprecision(17);
            for (std::size_t i = 0; i < paths.size(); ++i) {
                ExcursionSet e = excursions(paths[i].times, paths[i].z, c.eps());
                drop_degenerate_excursions(e, dec[i].y_hat);
                const LocalTimeCurve L = local_time_curve(paths[i].times, e, c.s0);
                const InverseLocalTime inv = inverse_local_time(L, e);
                const TimeChange tc = build_phi_pq(paths[i].times, paths[i].z, dec[i].y_hat, e, L, inv, p, c.q);
                for (std::size_t k = 0; k < tc.phi.size(); ++k)
                    f << i << ',' << tc.times[k] << ',' << tc.phi[k] << ',' << to_string(tc.tags[k]) << '\n';
            }
        } else if (command == "check-sp") {
            const auto exc = detail::excursions_all(c, paths);
            auto f = out.open("sp.jsonl");
            for (std::size_t i = 0; i < paths.size(); ++i) {
                const std::vector<Vec2> y = paths[i].y();
                for (std::size_t k = 0; k < exc[i].intervals.size(); ++k) {
                    const Excursion& e = exc[i].intervals[k];
                    if (!e.complete()) continue;
                    write_sp_jsonl(f, i, k,
                                   check_sp(paths[i].z, y, paths[i].x, cfg, e.g_index, e.d_index, c.band, c.tolerances));
                }
            }
        } else if (command == "check-esp") {
            const VertexCone v = c.cone(cfg);
            auto f = out.open("esp.jsonl");
            for (std::size_t i = 0; i < paths.size(); ++i) {
                const std::vector<Vec2> y = paths[i].y();
                write_esp_jsonl(f, i, check_esp(paths[i].z, y, paths[i].x, cfg, v, c.band, c.tolerances, c.esp_anchors));
            }
        }
        if ((command == "check-sp" || command == "check-esp") && !jsonl && log)
            *log << "note: JSONL is the only report format for " << command << '\n';
    }

    auto m = out.open("manifest.cfg");
    m << "# command: " << command << "\n# version: " << version
      << "\n# wall_time_s: " << std::setprecision(6) << detail::elapsed(start) << '\n';
    write_config(m, c);
    result.artifacts = out.names();
    return result;
}

}  // namespace wedge_rbm
