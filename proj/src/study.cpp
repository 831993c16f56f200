#include "poem/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace poem::study {

namespace {

using json = nlohmann::json;

grid::GridLadder build_case_ladder(const StudyConfig& config, const GridCase& gc) {
    const int dims = config.problem == schemes::ProblemKind::Advect2d ? 2 : 1;
    return grid::build_ladder(dims, gc.segments, gc.ratio, gc.levels, config.refinement,
                              {gc.dt, config.t_end});
}

std::vector<schemes::FieldLevel> solve_ladder(const StudyConfig& config,
                                              const grid::GridLadder& ladder) {
    schemes::SolverOptions options;
    options.cfl_limit = config.cfl_limit;
    const schemes::ProblemSpec problem = config.problem_spec();
    std::vector<std::future<schemes::FieldLevel>> futures;
    for (int l = 1; l <= ladder.levels; ++l)
        futures.push_back(std::async(std::launch::async, [&, l] {
            return schemes::solve(config.scheme, problem, ladder, l, options);
        }));
    std::vector<schemes::FieldLevel> fields;
    for (auto& f : futures) fields.push_back(f.get());
    return fields;
}

double l2_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

std::vector<double> term_l2(const midas::WindowFits& wf,
                            std::optional<grid::Provenance> filter) {
    if (wf.points.empty()) throw EmptyField("window has no fitted points");
    const int k = static_cast<int>(wf.points.front().fit.terms.size());
    std::vector<double> out;
    for (int m = 0; m < k; ++m) {
        std::vector<double> vals;
        for (const midas::PointFit& p : wf.points)
            if (!filter || p.provenance == *filter) vals.push_back(p.fit.terms[m]);
        out.push_back(l2_of(vals));
    }
    return out;
}

estimator::WindowReport build_window_report(const midas::WindowFits& wf,
                                            const schemes::FieldLevel& coarse,
                                            const StudyConfig& config, bool use_exact) {
    const schemes::ProblemSpec problem = config.problem_spec();
    estimator::WindowReport w;
    w.coarse_level = wf.window + 1;
    w.h = wf.h;
    w.log10_h = std::log10(wf.h);
    for (const midas::PointFit& p : wf.points)
        (p.provenance == grid::Provenance::AllShared ? w.support_shared : w.support_objective)++;

    w.term_l2 = term_l2(wf, std::nullopt);
    w.term_l2_shared = term_l2(wf, grid::Provenance::AllShared);
    if (w.support_objective > 0) w.term_l2_objective = term_l2(wf, grid::Provenance::Objective);

    if (w.term_l2.size() >= 2) {
        try {
            auto b = estimator::beta_ratio(w.term_l2[0], w.term_l2[1], config.beta);
            w.beta = b.beta;
            w.asymptotic = b.asymptotic;
        } catch (const ZeroLeadingTerm&) {
            w.beta_defined = false;  // reported as indeterminate, never clamped
        }
    } else {
        w.beta_defined = false;
    }

    Eigen::ArrayXd eps_tilde(wf.points.size());
    for (std::size_t i = 0; i < wf.points.size(); ++i)
        eps_tilde[static_cast<Eigen::Index>(i)] = wf.points[i].fit.error_estimate();
    w.eps_tilde = estimator::norms(eps_tilde);

    if (use_exact) {
        const double t = to_double(config.t_end);
        std::vector<double> es_ex, eps_shared;
        for (const midas::PointFit& p : wf.points) {
            const double phi_e = schemes::exact_solution(problem, p.x, p.y, t);
            es_ex.push_back(p.fit.phi_e_hat - phi_e);
            if (p.provenance == grid::Provenance::AllShared)
                // phi on the coarsest level reconstructs exactly from the fit.
                eps_shared.push_back(p.fit.phi_e_hat + p.fit.error_estimate() - phi_e);
        }
        w.es_ex = estimator::norms(Eigen::Map<Eigen::ArrayXd>(es_ex.data(), es_ex.size()));
        w.eps_shared =
            estimator::norms(Eigen::Map<Eigen::ArrayXd>(eps_shared.data(), eps_shared.size()));

        Eigen::ArrayXd eps(coarse.values.size());
        const long long n = coarse.segments;
        for (long long iy = 0; iy < (coarse.dims == 2 ? n : 1); ++iy)
            for (long long ix = 0; ix < n; ++ix) {
                const double x = static_cast<double>(ix) * coarse.dx;
                const double y = static_cast<double>(iy) * coarse.dx;
                eps[iy * (coarse.dims == 2 ? n : 0) + ix] =
                    coarse.values[iy * (coarse.dims == 2 ? n : 0) + ix] -
                    schemes::exact_solution(problem, x, y, t);
            }
        w.eps_full = estimator::norms(eps);
    }
    return w;
}

void finish_report(estimator::ConvergenceReport& report, const estimator::PresetOrders& orders) {
    if (report.windows.size() < 2) return;
    const auto h = report.window_h();
    const auto terms = report.term_l2_per_window();
    for (std::size_t m = 0; m < report.windows.front().term_l2.size(); ++m) {
        std::vector<double> series;
        for (const auto& row : terms) series.push_back(row[m]);
        const auto slopes = estimator::log_slope(h, series);
        if (report.term_slopes.empty()) report.term_slopes.resize(slopes.size());
        for (std::size_t i = 0; i < slopes.size(); ++i) report.term_slopes[i].push_back(slopes[i]);
    }
    report.order_check = estimator::check_orders(h, terms, orders);
}

bool path_has_exact(const StudyConfig& config) {
    // Under time-only refinement the expansion converges to the semi-discrete
    // solution, not the analytic one, so exact-solution comparisons are off.
    return config.refinement != grid::RefinementPath::TimeOnly;
}

}  // namespace

long long work_units(const grid::GridLadder& ladder) {
    long long total = 0;
    for (int l = 0; l < ladder.levels; ++l) {
        long long points = ladder.segments[l];
        if (ladder.dims == 2) points *= ladder.segments[l];
        total += points * ladder.steps[l];
    }
    return total;
}

StudyResult run_study(const StudyConfig& config) {
    config.orders.validate();
    if (config.cases.empty()) throw ConfigError("no grids configured");
    if (config.cfl_limit > 0.5 && config.scheme == schemes::Scheme::Rk2Upwind2)
        std::cerr << "warning: Rk2Upwind2 CFL limit raised to " << config.cfl_limit
                  << "; results may be outside the scheme's stable range\n";

    StudyResult result;
    const bool use_exact = path_has_exact(config);

    if (config.protocol == Protocol::TwoTier) {
        // Each case: a 3-level fractional ladder refined globally by 1/2 per
        // tier; every tier contributes one window.
        std::vector<std::pair<grid::GridLadder, std::vector<schemes::FieldLevel>>> primary;
        for (std::size_t c = 0; c < config.cases.size(); ++c) {
            const GridCase& gc = config.cases[c];
            CaseResult cr;
            cr.grid_case = gc;
            for (int g = 0; g < config.tiers; ++g) {
                GridCase tier = gc;
                tier.segments = gc.segments << g;
                tier.dt = gc.dt / Fraction(1LL << g);
                const grid::GridLadder ladder = build_case_ladder(config, tier);
                auto fields = solve_ladder(config, ladder);
                auto wf = midas::fit_window(ladder, fields, config.orders, 0, true);
                cr.report.windows.push_back(
                    build_window_report(wf, fields.front(), config, use_exact));
                cr.work += work_units(ladder);
                if (c == 0) primary.emplace_back(ladder, std::move(fields));
            }
            finish_report(cr.report, config.orders);
            result.total_work += cr.work;
            result.cases.push_back(std::move(cr));
        }
        if (primary.size() >= 2) {
            std::vector<double> h;
            for (const auto& [ladder, fields] : primary) h.push_back(ladder.h_at(1));
            auto evaluate = [&](const estimator::PresetOrders& cand) {
                std::vector<std::vector<double>> rows;
                for (const auto& [ladder, fields] : primary)
                    rows.push_back(
                        term_l2(midas::fit_window(ladder, fields, cand, 0, true), std::nullopt));
                return rows;
            };
            result.iteration = estimator::iterate_orders(evaluate, h, config.orders);
        }
        return result;
    }

    for (std::size_t c = 0; c < config.cases.size(); ++c) {
        const grid::GridLadder ladder = build_case_ladder(config, config.cases[c]);
        const auto fields = solve_ladder(config, ladder);
        const bool objective = config.midas;

        CaseResult cr;
        cr.grid_case = config.cases[c];
        cr.work = work_units(ladder);
        std::vector<midas::WindowFits> window_fits;
        for (int w = 0; w + config.orders.k() + 1 <= ladder.levels; ++w)
            window_fits.push_back(midas::fit_window(ladder, fields, config.orders, w, objective));
        for (const auto& wf : window_fits)
            cr.report.windows.push_back(
                build_window_report(wf, fields[wf.window], config, use_exact));
        finish_report(cr.report, config.orders);

        if (c == 0 && cr.report.windows.size() >= 2) {
            auto evaluate = [&](const estimator::PresetOrders& cand) {
                std::vector<std::vector<double>> rows;
                for (int w = 0; w + cand.k() + 1 <= ladder.levels; ++w)
                    rows.push_back(
                        term_l2(midas::fit_window(ladder, fields, cand, w, objective), std::nullopt));
                return rows;
            };
            result.iteration =
                estimator::iterate_orders(evaluate, cr.report.window_h(), config.orders);
        }
        result.total_work += cr.work;
        result.cases.push_back(std::move(cr));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Output files

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string case_suffix(const StudyConfig& config, std::size_t index) {
    if (config.protocol == Protocol::Single) return "";
    const Fraction r = config.cases[index].ratio;
    std::string s = "-r" + std::to_string(r.numerator()) + "-" + std::to_string(r.denominator());
    for (std::size_t i = 0; i < index; ++i)
        if (config.cases[i].ratio == r) return s + "-" + std::to_string(index);
    return s;
}

double safe_log10(double v) { return std::log10(v); }

DataTable norm_table(const estimator::ConvergenceReport& report,
                     const std::function<const estimator::Norms*(const estimator::WindowReport&)>& get,
                     const std::string& provenance) {
    DataTable t;
    t.columns = {"log10_h", "log10_l1", "log10_l2", "log10_linf"};
    t.provenance = provenance;
    for (const auto& w : report.windows) {
        const estimator::Norms* n = get(w);
        if (!n) continue;
        t.rows.push_back({w.log10_h, safe_log10(n->l1), safe_log10(n->l2), safe_log10(n->linf)});
    }
    return t;
}

DataTable slope_table(const DataTable& values, const std::string& provenance) {
    DataTable t;
    t.columns = values.columns;
    t.columns[0] = "log10_h";
    for (std::size_t i = 1; i < t.columns.size(); ++i) {
        std::string c = t.columns[i];
        if (c.rfind("log10_", 0) == 0) c = c.substr(6);
        t.columns[i] = "slope_" + c;
    }
    t.provenance = provenance;
    for (std::size_t i = 1; i < values.rows.size(); ++i) {
        std::vector<double> row{values.rows[i][0]};  // attributed to the finer window
        for (std::size_t j = 1; j < values.rows[i].size(); ++j)
            row.push_back((values.rows[i][j] - values.rows[i - 1][j]) /
                          (values.rows[i][0] - values.rows[i - 1][0]));
        t.rows.push_back(row);
    }
    return t;
}

json norms_json(const estimator::Norms& n) {
    return json{{"l1", n.l1}, {"l2", n.l2}, {"linf", n.linf}};
}

json window_json(const estimator::WindowReport& w) {
    json j{{"coarse_level", w.coarse_level},
           {"h", w.h},
           {"log10_h", w.log10_h},
           {"support_shared", w.support_shared},
           {"support_objective", w.support_objective},
           {"term_l2", w.term_l2},
           {"term_l2_shared", w.term_l2_shared},
           {"term_l2_objective", w.term_l2_objective},
           {"beta_defined", w.beta_defined},
           {"asymptotic", w.asymptotic},
           {"eps_tilde", norms_json(w.eps_tilde)}};
    if (w.beta_defined) j["beta"] = w.beta;
    if (w.eps_full) j["eps_full"] = norms_json(*w.eps_full);
    if (w.eps_shared) j["eps_shared"] = norms_json(*w.eps_shared);
    if (w.es_ex) j["es_ex"] = norms_json(*w.es_ex);
    return j;
}

json check_json(const estimator::OrderCheck& check) {
    json verdicts = json::array();
    for (const auto& v : check.verdicts)
        verdicts.push_back(
            {{"preset", v.preset}, {"observed_slope", v.observed_slope}, {"matches", v.matches}});
    return json{{"all_match", check.all_match},
                {"suggested_mu", check.suggested_mu},
                {"verdicts", verdicts}};
}

}  // namespace

void emit_dat(const DataTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "#";
    for (const auto& c : table.columns) out << " " << c;
    out << "\n# " << table.provenance << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << fmt(row[j]);
        out << "\n";
    }
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

DataTable parse_dat(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read '" + path.string() + "'");
    DataTable t;
    std::string line;
    if (!std::getline(in, line) || line.rfind("#", 0) != 0)
        throw Error("'" + path.string() + "': missing column header");
    std::istringstream cols(line.substr(1));
    std::string tok;
    while (cols >> tok) t.columns.push_back(tok);
    if (!std::getline(in, line) || line.rfind("#", 0) != 0)
        throw Error("'" + path.string() + "': missing provenance header");
    t.provenance = line.size() > 2 ? line.substr(2) : "";
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::vector<double> values;
        double v;
        while (row >> v) values.push_back(v);
        t.rows.push_back(values);
    }
    return t;
}

StudyResult run_study_with_outputs(const StudyConfig& config) {
    StudyResult result = run_study(config);
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    const std::string stamp = "emitted by poem, study '" + config.name + "'";

    json jcases = json::array();
    for (std::size_t c = 0; c < result.cases.size(); ++c) {
        const CaseResult& cr = result.cases[c];
        const estimator::ConvergenceReport& report = cr.report;
        const std::string sfx = case_suffix(config, c);

        if (config.protocol == Protocol::TwoTier) {
            DataTable cons;
            cons.provenance = stamp;
            cons.columns = {"log10_h"};
            const std::size_t k = report.windows.front().term_l2.size();
            for (std::size_t m = 1; m <= k; ++m)
                cons.columns.push_back("log10_l2_term" + std::to_string(m) + "_shared");
            for (std::size_t m = 1; m <= k; ++m)
                cons.columns.push_back("log10_l2_term" + std::to_string(m) + "_objective");
            for (const auto& w : report.windows) {
                std::vector<double> row{w.log10_h};
                for (double v : w.term_l2_shared) row.push_back(safe_log10(v));
                for (double v : w.term_l2_objective) row.push_back(safe_log10(v));
                cons.rows.push_back(row);
            }
            emit_dat(cons, dir / ("cons" + sfx + ".dat"));
        } else {
            DataTable cnorm;
            cnorm.provenance = stamp;
            cnorm.columns = {"log10_h"};
            const std::size_t k = report.windows.front().term_l2.size();
            for (std::size_t m = 1; m <= k; ++m)
                cnorm.columns.push_back("log10_l2_term" + std::to_string(m));
            for (const auto& w : report.windows) {
                std::vector<double> row{w.log10_h};
                for (double v : w.term_l2) row.push_back(safe_log10(v));
                cnorm.rows.push_back(row);
            }
            emit_dat(cnorm, dir / ("cnorm" + sfx + ".dat"));
            if (cnorm.rows.size() >= 2)
                emit_dat(slope_table(cnorm, stamp), dir / ("cnorm_slope" + sfx + ".dat"));
        }

        DataTable beta;
        beta.columns = {"log10_h", "beta", "asymptotic"};
        beta.provenance = stamp;
        for (const auto& w : report.windows)
            beta.rows.push_back(
                {w.log10_h, w.beta_defined ? w.beta : std::nan(""), w.asymptotic ? 1.0 : 0.0});
        emit_dat(beta, dir / ("beta" + sfx + ".dat"));

        const auto write_norms = [&](const std::string& base, auto getter) {
            DataTable t = norm_table(report, getter, stamp);
            if (t.rows.empty()) return;
            emit_dat(t, dir / (base + sfx + ".dat"));
            if (t.rows.size() >= 2)
                emit_dat(slope_table(t, stamp), dir / (base + "_slope" + sfx + ".dat"));
        };
        write_norms("es_err", [](const estimator::WindowReport& w) { return &w.eps_tilde; });
        write_norms("disc_err", [](const estimator::WindowReport& w) {
            return w.eps_full ? &*w.eps_full : nullptr;
        });
        write_norms("es_ex", [](const estimator::WindowReport& w) {
            return w.es_ex ? &*w.es_ex : nullptr;
        });

        json jcase{{"ratio", to_string(cr.grid_case.ratio)},
                   {"segments", cr.grid_case.segments},
                   {"dt", to_string(cr.grid_case.dt)},
                   {"levels", cr.grid_case.levels},
                   {"work_units", cr.work},
                   {"term_slopes", report.term_slopes}};
        json jwindows = json::array();
        for (const auto& w : report.windows) jwindows.push_back(window_json(w));
        jcase["windows"] = jwindows;
        if (!report.order_check.verdicts.empty()) jcase["order_check"] = check_json(report.order_check);
        jcases.push_back(jcase);
    }

    json jreport{{"study", config.name},
                 {"beta_threshold", config.beta},
                 {"midas", config.midas},
                 {"orders", config.orders.p},
                 {"order_quantum", config.orders.order_quantum},
                 {"total_work_units", result.total_work},
                 {"cases", jcases}};
    if (!result.iteration.trail.empty()) {
        json trail = json::array();
        for (const auto& step : result.iteration.trail)
            trail.push_back({{"orders", step.orders}, {"check", check_json(step.check)}});
        jreport["order_iteration"] = {{"converged", result.iteration.converged},
                                      {"final_orders", result.iteration.final_orders},
                                      {"trail", trail}};
    }
    {
        std::ofstream out(dir / "report.json");
        if (!out) throw Error("cannot write report.json");
        out << jreport.dump(2) << "\n";
    }

    std::ofstream sum(dir / "summary.txt");
    if (!sum) throw Error("cannot write summary.txt");
    sum << "study " << config.name << "\n";
    sum << "total work units " << result.total_work << "\n";
    for (std::size_t c = 0; c < result.cases.size(); ++c) {
        const CaseResult& cr = result.cases[c];
        sum << "\ncase ratio " << to_string(cr.grid_case.ratio) << ", base segments "
            << cr.grid_case.segments << ", dt " << to_string(cr.grid_case.dt) << ", levels "
            << cr.grid_case.levels << ", work units " << cr.work << "\n";
        for (const auto& w : cr.report.windows) {
            sum << "  window at level " << w.coarse_level << ": log10 h = " << fmt(w.log10_h)
                << ", support " << w.support_shared << " shared + " << w.support_objective
                << " objective";
            if (w.beta_defined)
                sum << ", beta = " << fmt(w.beta) << (w.asymptotic ? " (asymptotic)" : "");
            else
                sum << ", beta indeterminate";
            sum << "\n";
        }
        if (!cr.report.order_check.verdicts.empty()) {
            sum << "  order check:";
            for (const auto& v : cr.report.order_check.verdicts)
                sum << " p=" << v.preset << " slope=" << fmt(v.observed_slope)
                    << (v.matches ? " ok" : " DEVIATES");
            if (!cr.report.order_check.all_match)
                sum << " (suggested mu " << cr.report.order_check.suggested_mu << ")";
            sum << "\n";
        }
    }
    if (!result.iteration.trail.empty()) {
        sum << "\norder iteration (" << (result.iteration.converged ? "converged" : "budget exhausted")
            << "):\n";
        for (const auto& step : result.iteration.trail) {
            sum << "  orders";
            for (double p : step.orders) sum << " " << p;
            sum << " ->";
            for (const auto& v : step.check.verdicts)
                sum << " " << fmt(v.observed_slope) << (v.matches ? "" : "*");
            sum << "\n";
        }
        sum << "  final orders:";
        for (double p : result.iteration.final_orders) sum << " " << p;
        sum << "\n";
    }
    return result;
}

CostComparison cost_model(const StudyConfig& a, const StudyConfig& b) {
    CostComparison out;
    const auto total = [](const StudyConfig& c) {
        long long w = 0;
        if (c.protocol == Protocol::TwoTier) {
            for (const GridCase& gc : c.cases)
                for (int g = 0; g < c.tiers; ++g) {
                    GridCase tier = gc;
                    tier.segments = gc.segments << g;
                    tier.dt = gc.dt / Fraction(1LL << g);
                    w += work_units(build_case_ladder(c, tier));
                }
        } else {
            for (const GridCase& gc : c.cases) w += work_units(build_case_ladder(c, gc));
        }
        return w;
    };
    out.work_a = total(a);
    out.work_b = total(b);
    out.ratio = static_cast<double>(out.work_a) / static_cast<double>(out.work_b);
    return out;
}

}  // namespace poem::study
