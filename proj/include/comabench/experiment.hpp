// SPDX-License-Identifier: Apache-2.0
//
// comabench - multiuser MISO precoding workbench for constructive multiple access
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Experiment runner: parameter sweeps over the precoding schemes with
// machine-readable CSV / JSON-lines output. Fully deterministic for a fixed
// (config, seed): every channel draw owns a substream derived from the
// master seed, sweep points are computed independently (possibly on worker
// threads) and rows are sorted before emission.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "comabench/complexity.hpp"
#include "comabench/montecarlo.hpp"
#include "comabench/ser_min.hpp"

namespace comabench {

enum class ExperimentKind {
    PowerVsAntennas,
    PowerVsTargets,
    SerVsPower,
    ComplexityVsAntennas,
    ComplexityVsModOrder
};

inline const char* experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::PowerVsAntennas: return "power_vs_antennas";
        case ExperimentKind::PowerVsTargets: return "power_vs_targets";
        case ExperimentKind::SerVsPower: return "ser_vs_power";
        case ExperimentKind::ComplexityVsAntennas: return "complexity_vs_antennas";
        default: return "complexity_vs_mod_order";
    }
}

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::PowerVsAntennas;
    std::vector<int> n_list{2};      // antenna sweep (or the single N)
    double var1 = 2.0, var2 = 1.0;   // channel variances
    double noise1 = 1.0, noise2 = 1.0;
    double sic_err_var = 0.0;
    double r1 = 1.0, r2 = 1.0;       // target SINRs (linear)
    std::string sweep_target = "r2";  // power_vs_targets: which target sweeps
    std::vector<double> target_grid{1.0, 2.0, 3.0};
    std::vector<double> p_grid{0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    int mod_order = 4;
    std::vector<int> m_grid{2, 4, 8, 16, 32};
    int k_pairs = 1;
    int d_of_m = 0;      // 0: default D(M) = M
    int sub_const = 1;   // the O(M^2) subtraction constant
    long n_draws = 500;
    long n_symbols = 100000;
    int symbols_per_draw = 100;
    long analytic_draws = 200;
    bool noma_strong_floor = true;  // SER figures use the all-stage variant
    std::uint64_t seed = 1;
    std::vector<Scheme> schemes{Scheme::OMA, Scheme::NOMA, Scheme::CoMA};

    void validate() const {
        if (schemes.empty()) throw std::invalid_argument("config: scheme set is empty");
        if (n_draws < 1) throw std::invalid_argument("config: draws must be >= 1");
        if (n_symbols < 1) throw std::invalid_argument("config: symbols must be >= 1");
        if (n_list.empty()) throw std::invalid_argument("config: antenna list is empty");
        for (int n : n_list)
            if (n < 1) throw std::invalid_argument("config: antenna count must be >= 1");
        if (experiment == ExperimentKind::PowerVsTargets) {
            if (target_grid.empty()) throw std::invalid_argument("config: target grid is empty");
            if (sweep_target != "r1" && sweep_target != "r2")
                throw std::invalid_argument("config: sweep_target must be r1 or r2");
        }
        if (experiment == ExperimentKind::SerVsPower && p_grid.empty())
            throw std::invalid_argument("config: power grid is empty");
        if (experiment == ExperimentKind::ComplexityVsModOrder && m_grid.empty())
            throw std::invalid_argument("config: modulation grid is empty");
        if (mod_order < 2 || (mod_order & (mod_order - 1)) != 0)
            throw std::invalid_argument("config: mod_order must be a power of two >= 2");
        if (symbols_per_draw < 1)
            throw std::invalid_argument("config: symbols_per_draw must be >= 1");
    }

    PairScenario scenario(int n) const {
        PairScenario sc;
        sc.n_antennas = n;
        sc.var1 = var1;
        sc.var2 = var2;
        sc.noise1 = noise1;
        sc.noise2 = noise2;
        sc.sic_err_var = sic_err_var;
        sc.r1 = r1;
        sc.r2 = r2;
        sc.constellation = PskConstellation(mod_order);
        return sc;
    }
};

struct ResultRow {
    std::string experiment;
    std::string scheme;
    double x = 0.0;
    std::string metric;
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long n_samples = 0;
    std::uint64_t seed = 0;
};

namespace experiment_detail {

struct MeanAcc {
    double sum = 0.0, sum_sq = 0.0;
    long n = 0;
    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++n;
    }
    double mean() const { return n ? sum / n : 0.0; }
    double se() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1));
        return std::sqrt(var / n);
    }
};

inline ResultRow row(const ExperimentConfig& cfg, const char* scheme, double x,
                     const std::string& metric, double v, double lo, double hi, long n) {
    ResultRow r;
    r.experiment = experiment_name(cfg.experiment);
    r.scheme = scheme;
    r.x = x;
    r.metric = metric;
    r.value = v;
    r.ci_low = lo;
    r.ci_high = hi;
    r.n_samples = n;
    r.seed = cfg.seed;
    return r;
}

inline ResultRow exact_row(const ExperimentConfig& cfg, const char* scheme, double x,
                           const std::string& metric, double v) {
    return row(cfg, scheme, x, metric, v, v, v, 1);
}

inline bool wants(const ExperimentConfig& cfg, Scheme s) {
    return std::find(cfg.schemes.begin(), cfg.schemes.end(), s) != cfg.schemes.end();
}

// mean power of the requested schemes over shared channel draws
inline std::vector<ResultRow> power_point(const ExperimentConfig& cfg, const PairScenario& sc,
                                          double x, std::uint64_t point_salt) {
    Rng point_rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * (point_salt + 1)));
    MeanAcc coma, coma_split, noma, oma;
    long resampled = 0;
    long done = 0;
    std::uint64_t draw_idx = 0;
    while (done < cfg.n_draws) {
        Rng draw_rng = point_rng.fork(draw_idx++);
        auto ha = sample_channel(sc.n_antennas, sc.var1, draw_rng);
        auto hb = sample_channel(sc.n_antennas, sc.var2, draw_rng);
        auto [h1, h2] = order_pair(ha, hb);
        try {
            if (wants(cfg, Scheme::CoMA)) {
                auto r = solve_power_min_coma(sc, h1, h2, sc.constellation.symbol(0),
                                              sc.constellation.symbol(1));
                coma.add(r.power);
                coma_split.add(norm_sq(r.precoders.w1) + norm_sq(r.precoders.w2));
            }
            if (wants(cfg, Scheme::NOMA)) noma.add(solve_power_min_noma(sc, h1, h2).power);
            if (wants(cfg, Scheme::OMA)) oma.add(solve_power_min_oma(sc, h1, h2).second);
            ++done;
        } catch (const InfeasibleProblem&) {
            ++resampled;
            if (resampled > cfg.n_draws * 10)
                throw InfeasibleProblem("power sweep: systematically infeasible point");
        }
    }

    std::vector<ResultRow> rows;
    auto push_scheme = [&](const char* name, const MeanAcc& acc) {
        const double m = acc.mean(), h = 1.959963984540054 * acc.se();
        rows.push_back(row(cfg, name, x, "power_mean", m, m - h, m + h, acc.n));
        rows.push_back(row(cfg, name, x, "power_mean_db", 10.0 * std::log10(m),
                           10.0 * std::log10(std::max(1e-300, m - h)),
                           10.0 * std::log10(m + h), acc.n));
        rows.push_back(exact_row(cfg, name, x, "resample_rate",
                                 static_cast<double>(resampled) / cfg.n_draws));
    };
    if (wants(cfg, Scheme::CoMA)) {
        push_scheme("CoMA", coma);
        const double m = coma_split.mean(), h = 1.959963984540054 * coma_split.se();
        rows.push_back(row(cfg, "CoMA", x, "power_split_mean", m, m - h, m + h, coma_split.n));
    }
    if (wants(cfg, Scheme::NOMA)) push_scheme("NOMA", noma);
    if (wants(cfg, Scheme::OMA)) push_scheme("OMA", oma);
    return rows;
}

inline std::vector<ResultRow> ser_point(const ExperimentConfig& cfg, PairScenario sc, double P,
                                        std::uint64_t point_salt) {
    sc.power_budget = P;
    std::vector<ResultRow> rows;
    MonteCarloOptions opt;
    opt.symbols_per_draw = cfg.symbols_per_draw;

    auto mc_rows = [&](Scheme scheme, const PrecoderSource& src) {
        Rng rng(cfg.seed ^ (0xbf58476d1ce4e5b9ULL * (point_salt + 1)) ^
                static_cast<std::uint64_t>(scheme));
        auto rep = monte_carlo_ser(scheme, sc, src, cfg.n_symbols, rng, opt);
        const char* name = scheme_name(scheme);
        rows.push_back(row(cfg, name, P, "ser_u1", rep.ser_u1, rep.wilson_u1.lo,
                           rep.wilson_u1.hi, rep.trials));
        rows.push_back(row(cfg, name, P, "ser_u2", rep.ser_u2, rep.wilson_u2.lo,
                           rep.wilson_u2.hi, rep.trials));
        const auto& wmax = (rep.ser_u1 >= rep.ser_u2) ? rep.wilson_u1 : rep.wilson_u2;
        rows.push_back(row(cfg, name, P, "ser_max", rep.ser_max, wmax.lo, wmax.hi, rep.trials));
        rows.push_back(exact_row(cfg, name, P, "resample_rate",
                                 static_cast<double>(rep.resampled_draws) /
                                     std::max<long>(1, rep.trials / cfg.symbols_per_draw)));
    };

    if (wants(cfg, Scheme::CoMA)) {
        mc_rows(Scheme::CoMA, [&sc](const ChannelVector& h1, const ChannelVector& h2, int d) {
            return solve_sermin_coma(sc, h1, h2, sc.constellation.symbol(0),
                                     sc.constellation.symbol(d), 60, 1e-6)
                .precoders;
        });
    }
    if (wants(cfg, Scheme::NOMA)) {
        const bool floor = cfg.noma_strong_floor;
        mc_rows(Scheme::NOMA, [&sc, floor](const ChannelVector& h1, const ChannelVector& h2,
                                           int) {
            return solve_sermin_noma(sc, h1, h2, 1e-4, floor).precoders;
        });
    }
    if (wants(cfg, Scheme::OMA)) {
        mc_rows(Scheme::OMA, [&sc](const ChannelVector& h1, const ChannelVector& h2, int) {
            return solve_sermin_oma(sc, h1, h2).first;
        });
    }

    // analytic companion curve: mean Q(sqrt(min SNR)) over fresh draws
    Rng arng(cfg.seed ^ (0x94d049bb133111ebULL * (point_salt + 1)));
    MeanAcc a_coma, a_noma, a_oma;
    for (long d = 0; d < cfg.analytic_draws; ++d) {
        Rng draw_rng = arng.fork(d);
        auto ha = sample_channel(sc.n_antennas, sc.var1, draw_rng);
        auto hb = sample_channel(sc.n_antennas, sc.var2, draw_rng);
        auto [h1, h2] = order_pair(ha, hb);
        try {
            if (wants(cfg, Scheme::CoMA))
                a_coma.add(ser_from_snr(solve_sermin_coma(sc, h1, h2,
                                                          sc.constellation.symbol(0),
                                                          sc.constellation.symbol(1), 60, 1e-6)
                                            .t_star));
            if (wants(cfg, Scheme::NOMA)) {
                auto r = solve_sermin_noma(sc, h1, h2, 1e-4, cfg.noma_strong_floor);
                const double t_min = cfg.noma_strong_floor
                                         ? r.t_star
                                         : std::min(std::norm(dotu(h1.coeffs, r.precoders.w1)) /
                                                        sc.noise1,
                                                    r.t_star);
                a_noma.add(ser_from_snr(t_min));
            }
            if (wants(cfg, Scheme::OMA)) a_oma.add(ser_from_snr(solve_sermin_oma(sc, h1, h2).second));
        } catch (const InfeasibleProblem&) {
            // analytic curve simply skips failed draws
        }
    }
    auto push_analytic = [&](const char* name, const MeanAcc& acc) {
        if (!acc.n) return;
        const double m = acc.mean(), h = 1.959963984540054 * acc.se();
        rows.push_back(row(cfg, name, P, "ser_min_snr_analytic", m, m - h, m + h, acc.n));
    };
    if (wants(cfg, Scheme::CoMA)) push_analytic("CoMA", a_coma);
    if (wants(cfg, Scheme::NOMA)) push_analytic("NOMA", a_noma);
    if (wants(cfg, Scheme::OMA)) push_analytic("OMA", a_oma);
    return rows;
}

inline std::vector<ResultRow> complexity_point(const ExperimentConfig& cfg, int n, int m,
                                               double x) {
    auto rep = complexity_report(n, m, cfg.k_pairs, cfg.d_of_m > 0 ? cfg.d_of_m : m,
                                 cfg.sub_const);
    std::vector<ResultRow> rows;
    if (wants(cfg, Scheme::NOMA))
        rows.push_back(
            exact_row(cfg, "NOMA", x, "complex_ops", rep.ops_noma.convert_to<double>()));
    if (wants(cfg, Scheme::CoMA))
        rows.push_back(
            exact_row(cfg, "CoMA", x, "complex_ops", rep.ops_coma.convert_to<double>()));
    return rows;
}

}  // namespace experiment_detail

/// Runs the configured sweep. Deterministic under a fixed (config, seed);
/// sweep points execute concurrently and rows are sorted before return.
inline std::vector<ResultRow> run(const ExperimentConfig& cfg) {
    using namespace experiment_detail;
    cfg.validate();

    std::vector<std::function<std::vector<ResultRow>()>> points;
    switch (cfg.experiment) {
        case ExperimentKind::PowerVsAntennas:
            for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
                const int n = cfg.n_list[i];
                points.push_back([&cfg, n, i] {
                    return power_point(cfg, cfg.scenario(n), static_cast<double>(n), i);
                });
            }
            break;
        case ExperimentKind::PowerVsTargets:
            for (std::size_t i = 0; i < cfg.target_grid.size(); ++i) {
                const double tgt = cfg.target_grid[i];
                points.push_back([&cfg, tgt, i] {
                    PairScenario sc = cfg.scenario(cfg.n_list.front());
                    if (cfg.sweep_target == "r1")
                        sc.r1 = tgt;
                    else
                        sc.r2 = tgt;
                    return power_point(cfg, sc, tgt, i);
                });
            }
            break;
        case ExperimentKind::SerVsPower:
            for (std::size_t i = 0; i < cfg.p_grid.size(); ++i) {
                const double P = cfg.p_grid[i];
                points.push_back([&cfg, P, i] {
                    return ser_point(cfg, cfg.scenario(cfg.n_list.front()), P, i);
                });
            }
            break;
        case ExperimentKind::ComplexityVsAntennas:
            for (int n : cfg.n_list)
                points.push_back([&cfg, n] {
                    return complexity_point(cfg, n, cfg.mod_order, static_cast<double>(n));
                });
            break;
        case ExperimentKind::ComplexityVsModOrder:
            for (int m : cfg.m_grid)
                points.push_back([&cfg, m] {
                    return complexity_point(cfg, cfg.n_list.front(), m, static_cast<double>(m));
                });
            break;
    }

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::vector<ResultRow> rows;
    if (hw == 1 || points.size() <= 1) {
        for (auto& p : points) {
            auto r = p();
            rows.insert(rows.end(), r.begin(), r.end());
        }
    } else {
        std::vector<std::future<std::vector<ResultRow>>> futs;
        futs.reserve(points.size());
        for (auto& p : points) futs.push_back(std::async(std::launch::async, p));
        for (auto& f : futs) {
            auto r = f.get();
            rows.insert(rows.end(), r.begin(), r.end());
        }
    }

    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.scheme != b.scheme) return a.scheme < b.scheme;
        if (a.x != b.x) return a.x < b.x;
        return a.metric < b.metric;
    });
    return rows;
}

enum class EmitFormat { Csv, JsonLines };

namespace experiment_detail {

inline std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace experiment_detail

/// CSV: fixed header, one row per ResultRow, 12 significant digits.
/// JSON-lines mirrors the same fields one object per line.
inline void emit(const std::vector<ResultRow>& rows, EmitFormat format, std::ostream& os) {
    using experiment_detail::fmt12;
    if (format == EmitFormat::Csv) {
        os << "experiment,scheme,x,metric,value,ci_low,ci_high,n,seed\n";
        for (const auto& r : rows)
            os << r.experiment << ',' << r.scheme << ',' << fmt12(r.x) << ',' << r.metric << ','
               << fmt12(r.value) << ',' << fmt12(r.ci_low) << ',' << fmt12(r.ci_high) << ','
               << r.n_samples << ',' << r.seed << '\n';
    } else {
        for (const auto& r : rows)
            os << "{\"experiment\":\"" << r.experiment << "\",\"scheme\":\"" << r.scheme
               << "\",\"x\":" << fmt12(r.x) << ",\"metric\":\"" << r.metric
               << "\",\"value\":" << fmt12(r.value) << ",\"ci_low\":" << fmt12(r.ci_low)
               << ",\"ci_high\":" << fmt12(r.ci_high) << ",\"n\":" << r.n_samples
               << ",\"seed\":" << r.seed << "}\n";
    }
    if (!os) throw std::runtime_error("emit: stream write failed");
}

inline void emit_to_file(const std::vector<ResultRow>& rows, EmitFormat format,
                         const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("emit: cannot open " + path);
    emit(rows, format, f);
    f.flush();
    if (!f) throw std::runtime_error("emit: write failed for " + path);
}

// ---------------------------------------------------------------------------
// flat key = value config files ('#' comments); lists are comma separated and
// integer lists accept a..b ranges
// ---------------------------------------------------------------------------

namespace experiment_detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& tok : split_list(s)) {
        const auto dots = tok.find("..");
        if (dots != std::string::npos) {
            const int a = std::stoi(tok.substr(0, dots));
            const int b = std::stoi(tok.substr(dots + 2));
            for (int v = a; v <= b; ++v) out.push_back(v);
        } else {
            out.push_back(std::stoi(tok));
        }
    }
    return out;
}

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& tok : split_list(s)) out.push_back(std::stod(tok));
    return out;
}

inline Scheme parse_scheme(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "oma") return Scheme::OMA;
    if (s == "noma") return Scheme::NOMA;
    if (s == "coma") return Scheme::CoMA;
    throw std::invalid_argument("config: unknown scheme '" + s + "'");
}

inline ExperimentKind parse_kind(const std::string& s) {
    if (s == "power_vs_antennas") return ExperimentKind::PowerVsAntennas;
    if (s == "power_vs_targets") return ExperimentKind::PowerVsTargets;
    if (s == "ser_vs_power") return ExperimentKind::SerVsPower;
    if (s == "complexity_vs_antennas") return ExperimentKind::ComplexityVsAntennas;
    if (s == "complexity_vs_mod_order") return ExperimentKind::ComplexityVsModOrder;
    throw std::invalid_argument("config: unknown experiment '" + s + "'");
}

}  // namespace experiment_detail

/// Applies one key = value assignment (the config-file grammar, also used for
/// command-line overrides).
inline void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
    using namespace experiment_detail;
    if (key == "experiment") cfg.experiment = parse_kind(value);
    else if (key == "n") cfg.n_list = parse_int_list(value);
    else if (key == "var1") cfg.var1 = std::stod(value);
    else if (key == "var2") cfg.var2 = std::stod(value);
    else if (key == "noise1") cfg.noise1 = std::stod(value);
    else if (key == "noise2") cfg.noise2 = std::stod(value);
    else if (key == "sic_err_var") cfg.sic_err_var = std::stod(value);
    else if (key == "r1") cfg.r1 = std::stod(value);
    else if (key == "r2") cfg.r2 = std::stod(value);
    else if (key == "sweep_target") cfg.sweep_target = value;
    else if (key == "target_grid") cfg.target_grid = parse_double_list(value);
    else if (key == "p_grid") cfg.p_grid = parse_double_list(value);
    else if (key == "mod_order") cfg.mod_order = std::stoi(value);
    else if (key == "m_grid") cfg.m_grid = parse_int_list(value);
    else if (key == "k_pairs") cfg.k_pairs = std::stoi(value);
    else if (key == "d_of_m") cfg.d_of_m = std::stoi(value);
    else if (key == "sub_const") cfg.sub_const = std::stoi(value);
    else if (key == "draws") cfg.n_draws = std::stol(value);
    else if (key == "symbols") cfg.n_symbols = std::stol(value);
    else if (key == "symbols_per_draw") cfg.symbols_per_draw = std::stoi(value);
    else if (key == "analytic_draws") cfg.analytic_draws = std::stol(value);
    else if (key == "noma_strong_floor") cfg.noma_strong_floor = (std::stoi(value) != 0);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "schemes") {
        cfg.schemes.clear();
        for (const auto& tok : split_list(value)) cfg.schemes.push_back(parse_scheme(tok));
    } else {
        throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            bool blank = true;
            for (char c : line)
                if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
            if (blank) continue;
            throw std::invalid_argument("config: malformed line " + std::to_string(lineno));
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return (b == std::string::npos) ? std::string{} : s.substr(b, e - b + 1);
        };
        apply_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

}  // namespace comabench
