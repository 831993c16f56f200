#include "poem/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace poem::estimator {

void PresetOrders::validate() const {
    if (p.empty()) throw DegenerateOrders("at least one preset order is required");
    if (order_quantum <= 0.0) throw DegenerateOrders("order quantum must be positive");
    for (std::size_t m = 0; m < p.size(); ++m) {
        if (p[m] <= 0.0) throw DegenerateOrders("preset orders must be positive");
        if (m > 0 && p[m] <= p[m - 1])
            throw DegenerateOrders("preset orders must be strictly increasing");
    }
}

Eigen::MatrixXd build_system(const std::vector<double>& orders, double r) {
    PresetOrders check{orders, 1.0};
    check.validate();
    if (r <= 0.0 || r >= 1.0) throw ConfigError("system ratio must lie in (0,1)");
    const int k = static_cast<int>(orders.size());
    Eigen::MatrixXd a(k + 1, k + 1);
    for (int l = 0; l <= k; ++l) {
        a(l, 0) = 1.0;
        for (int m = 0; m < k; ++m) a(l, m + 1) = std::pow(r, l * orders[m]);
    }
    return a;
}

ExpansionSolver::ExpansionSolver(std::vector<double> orders, double r)
    : orders_(std::move(orders)), lu_(build_system(orders_, r)) {
    // Distinct positive orders and r in (0,1) make the system regular; a
    // vanishing pivot can only come from degenerate inputs.
    if (lu_.matrixLU().diagonal().cwiseAbs().minCoeff() == 0.0)
        throw SingularSystem("principal system is singular");
}

ExpansionFit ExpansionSolver::fit(const Eigen::VectorXd& values) const {
    if (values.size() != k() + 1) throw MismatchedSupport("need k+1 values for the fit");
    Eigen::VectorXd sol = lu_.solve(values);
    ExpansionFit out;
    out.phi_e_hat = sol[0];
    out.terms = sol.tail(k());
    return out;
}

ExpansionFit fit_expansion(const Eigen::VectorXd& values, const std::vector<double>& orders,
                           double r) {
    return ExpansionSolver(orders, r).fit(values);
}

Eigen::ArrayXd estimate_error(const Eigen::ArrayXd& phi, const std::vector<ExpansionFit>& fits) {
    if (static_cast<std::size_t>(phi.size()) != fits.size())
        throw MismatchedSupport("field and fit supports differ");
    Eigen::ArrayXd out(phi.size());
    for (Eigen::Index i = 0; i < phi.size(); ++i) out[i] = phi[i] - fits[i].phi_e_hat;
    return out;
}

Norms norms(const Eigen::ArrayXd& field) {
    if (field.size() == 0) throw EmptyField("norms of an empty field");
    Norms n;
    double sum = 0.0, sumsq = 0.0;
    for (Eigen::Index i = 0; i < field.size(); ++i) {
        const double v = std::abs(field[i]);
        sum += v;
        sumsq += v * v;
        n.linf = std::max(n.linf, v);
    }
    n.l1 = sum / static_cast<double>(field.size());
    n.l2 = std::sqrt(sumsq / static_cast<double>(field.size()));
    return n;
}

std::vector<double> log_slope(const std::vector<double>& h, const std::vector<double>& values) {
    if (h.size() != values.size()) throw MismatchedSupport("h/value series length mismatch");
    if (h.size() < 2) throw InsufficientWindows("need at least two points for a slope");
    std::vector<double> slopes;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (values[i] <= 0.0) throw NonPositiveValue("log slope of a non-positive value");
        if (i > 0 && h[i] >= h[i - 1]) throw ConfigError("spacings must strictly decrease");
    }
    for (std::size_t i = 1; i < h.size(); ++i)
        slopes.push_back((std::log10(values[i]) - std::log10(values[i - 1])) /
                         (std::log10(h[i]) - std::log10(h[i - 1])));
    return slopes;
}

BetaResult beta_ratio(double first_term_l2, double second_term_l2, double threshold) {
    if (first_term_l2 <= 0.0)
        throw ZeroLeadingTerm("leading coefficient term has zero norm; ratio undefined");
    BetaResult out;
    out.beta = second_term_l2 / first_term_l2;
    out.asymptotic = out.beta < threshold;
    return out;
}

namespace {

double round_to_quantum(double value, double quantum) {
    double q = std::round(value / quantum) * quantum;
    return q < quantum ? quantum : q;
}

}  // namespace

OrderCheck check_orders(const std::vector<double>& h_per_window,
                        const std::vector<std::vector<double>>& term_l2_per_window,
                        const PresetOrders& orders, double tolerance) {
    orders.validate();
    if (h_per_window.size() < 2 || term_l2_per_window.size() != h_per_window.size())
        throw InsufficientWindows("order check needs at least two windows");

    OrderCheck out;
    out.all_match = true;
    double mu = 0.0;
    bool have_mu = false;
    for (int m = 0; m < orders.k(); ++m) {
        std::vector<double> series;
        for (const auto& w : term_l2_per_window) series.push_back(w.at(m));
        const double slope = log_slope(h_per_window, series).back();
        TermVerdict v{orders.p[m], slope, std::abs(slope - orders.p[m]) <= tolerance};
        if (!v.matches) {
            out.all_match = false;
            const double candidate = round_to_quantum(slope, orders.order_quantum);
            if (!have_mu || candidate < mu) mu = candidate;
            have_mu = true;
        }
        out.verdicts.push_back(v);
    }
    out.suggested_mu = have_mu ? mu : 0.0;
    return out;
}

OrderIteration iterate_orders(
    const std::function<std::vector<std::vector<double>>(const PresetOrders&)>& evaluate,
    const std::vector<double>& h_per_window, const PresetOrders& initial, int max_iterations,
    double tolerance) {
    if (max_iterations < 1) throw ConfigError("need at least one order iteration");
    PresetOrders current = initial;
    current.validate();

    OrderIteration out;
    for (int it = 0; it < max_iterations; ++it) {
        OrderCheck check = check_orders(h_per_window, evaluate(current), current, tolerance);
        out.trail.push_back({current.p, check});
        if (check.all_match) {
            out.final_orders = current.p;
            out.converged = true;
            return out;
        }
        // Replace every deviating order with mu, then restore a strictly
        // increasing set of the original size.
        std::set<double> next;
        for (const TermVerdict& v : check.verdicts) next.insert(v.matches ? v.preset : check.suggested_mu);
        while (static_cast<int>(next.size()) < current.k())
            next.insert(*next.rbegin() + current.order_quantum);
        current.p.assign(next.begin(), next.end());
    }
    out.final_orders = current.p;
    out.converged = false;
    return out;
}

GreResult gre_baseline(double phi1, double phi2, double phi3, double r) {
    if (r <= 0.0 || r >= 1.0) throw ConfigError("ratio must lie in (0,1)");
    const double d21 = phi2 - phi1;
    const double d32 = phi3 - phi2;
    if (d21 == 0.0 || d32 / d21 <= 0.0)
        throw UndefinedOrder("difference ratio is not positive; observed order undefined");
    GreResult out;
    out.observed_order = std::log(d32 / d21) / std::log(r);
    out.error_estimate = d21 / (std::pow(r, out.observed_order) - 1.0);
    return out;
}

std::vector<double> ConvergenceReport::window_h() const {
    std::vector<double> h;
    for (const WindowReport& w : windows) h.push_back(w.h);
    return h;
}

std::vector<std::vector<double>> ConvergenceReport::term_l2_per_window() const {
    std::vector<std::vector<double>> out;
    for (const WindowReport& w : windows) out.push_back(w.term_l2);
    return out;
}

}  // namespace poem::estimator
