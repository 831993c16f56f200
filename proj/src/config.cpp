#include <fstream>
#include <map>
#include <sstream>

#include "poem/study.hpp"

namespace poem::study {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& where) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError(where + ": not a number: '" + text + "'");
    }
    if (pos != text.size()) throw ConfigError(where + ": trailing characters in '" + text + "'");
    return v;
}

long long parse_int(const std::string& text, const std::string& where) {
    Fraction f;
    try {
        f = parse_fraction(text);
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    if (!is_integer(f)) throw ConfigError(where + ": expected an integer, got '" + text + "'");
    return f.numerator();
}

GridCase parse_case(const std::string& value, const std::string& where) {
    GridCase gc;
    bool have_ratio = false, have_segments = false, have_dt = false;
    std::istringstream in(value);
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": case entries use key=value, got '" + token + "'");
        const std::string k = token.substr(0, eq);
        const std::string v = token.substr(eq + 1);
        if (k == "ratio") {
            gc.ratio = parse_fraction(v);
            have_ratio = true;
        } else if (k == "segments") {
            gc.segments = parse_int(v, where);
            have_segments = true;
        } else if (k == "dt") {
            gc.dt = parse_fraction(v);
            have_dt = true;
        } else if (k == "levels") {
            gc.levels = static_cast<int>(parse_int(v, where));
        } else {
            throw ConfigError(where + ": unknown case key '" + k + "'");
        }
    }
    if (!have_ratio || !have_segments || !have_dt)
        throw ConfigError(where + ": a case needs ratio, segments, and dt");
    return gc;
}

}  // namespace

schemes::ProblemSpec StudyConfig::problem_spec() const {
    schemes::ProblemSpec spec;
    spec.kind = problem;
    spec.a = a;
    spec.a_y = a_y;
    spec.nu = nu;
    spec.t_end = to_double(t_end);
    return spec;
}

StudyConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");

    StudyConfig config;
    config.name = path.stem().string();

    GridCase single;
    bool saw_problem = false, saw_scheme = false, saw_a = false, saw_ay = false, saw_nu = false;
    bool saw_t_end = false, saw_refinement = false, saw_orders = false, saw_quantum = false;
    bool saw_ratio = false, saw_segments = false, saw_dt = false, saw_levels = false;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);

        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) throw ConfigError(where + ": empty value for '" + key + "'");

        if (key == "problem") {
            if (value == "advect1d") config.problem = schemes::ProblemKind::Advect1d;
            else if (value == "advdiff1d") config.problem = schemes::ProblemKind::AdvDiff1d;
            else if (value == "advect2d") config.problem = schemes::ProblemKind::Advect2d;
            else throw ConfigError(where + ": unknown problem '" + value + "'");
            saw_problem = true;
        } else if (key == "scheme") {
            if (value == "bw") config.scheme = schemes::Scheme::BeamWarming;
            else if (value == "rk2u2") config.scheme = schemes::Scheme::Rk2Upwind2;
            else throw ConfigError(where + ": unknown scheme '" + value + "'");
            saw_scheme = true;
        } else if (key == "a") {
            config.a = parse_double(value, where);
            saw_a = true;
        } else if (key == "a_y") {
            config.a_y = parse_double(value, where);
            saw_ay = true;
        } else if (key == "nu") {
            config.nu = parse_double(value, where);
            saw_nu = true;
        } else if (key == "t_end") {
            config.t_end = parse_fraction(value);
            saw_t_end = true;
        } else if (key == "refinement") {
            if (value == "time-only") config.refinement = grid::RefinementPath::TimeOnly;
            else if (value == "constant-cfl") config.refinement = grid::RefinementPath::ConstantCfl;
            else if (value == "constant-diffusion")
                config.refinement = grid::RefinementPath::ConstantDiffusion;
            else throw ConfigError(where + ": unknown refinement mode '" + value + "'");
            saw_refinement = true;
        } else if (key == "protocol") {
            if (value == "single") config.protocol = Protocol::Single;
            else if (value == "two-tier") config.protocol = Protocol::TwoTier;
            else if (value == "ratio-comparison") config.protocol = Protocol::RatioComparison;
            else throw ConfigError(where + ": unknown protocol '" + value + "'");
        } else if (key == "ratio") {
            single.ratio = parse_fraction(value);
            saw_ratio = true;
        } else if (key == "segments") {
            single.segments = parse_int(value, where);
            saw_segments = true;
        } else if (key == "dt") {
            single.dt = parse_fraction(value);
            saw_dt = true;
        } else if (key == "levels") {
            single.levels = static_cast<int>(parse_int(value, where));
            saw_levels = true;
        } else if (key == "case") {
            config.cases.push_back(parse_case(value, where));
        } else if (key == "tiers") {
            config.tiers = static_cast<int>(parse_int(value, where));
        } else if (key == "orders") {
            std::istringstream os(value);
            std::string tok;
            config.orders.p.clear();
            while (std::getline(os, tok, ',')) config.orders.p.push_back(parse_double(trim(tok), where));
            saw_orders = true;
        } else if (key == "order_quantum") {
            config.orders.order_quantum = parse_double(value, where);
            saw_quantum = true;
        } else if (key == "beta") {
            config.beta = parse_double(value, where);
        } else if (key == "midas") {
            if (value == "on") config.midas = true;
            else if (value == "off") config.midas = false;
            else throw ConfigError(where + ": midas must be 'on' or 'off'");
        } else if (key == "cfl_limit") {
            config.cfl_limit = parse_double(value, where);
        } else if (key == "out_dir") {
            config.out_dir = value;
        } else if (key == "name") {
            config.name = value;
        } else {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }

    const std::string f = path.filename().string();
    if (!saw_problem) throw ConfigError(f + ": missing required key 'problem'");
    if (!saw_scheme) throw ConfigError(f + ": missing required key 'scheme'");
    if (!saw_a) throw ConfigError(f + ": missing required key 'a'");
    if (!saw_t_end) throw ConfigError(f + ": missing required key 't_end'");
    if (!saw_refinement) throw ConfigError(f + ": missing required key 'refinement'");
    if (!saw_orders) throw ConfigError(f + ": missing required key 'orders'");
    if (config.problem == schemes::ProblemKind::Advect2d && !saw_ay)
        throw ConfigError(f + ": advect2d needs 'a_y'");
    if (config.problem == schemes::ProblemKind::AdvDiff1d && !saw_nu)
        throw ConfigError(f + ": advdiff1d needs 'nu'");
    if (config.nu < 0.0) throw ConfigError(f + ": nu must be non-negative");
    if (config.beta < 0.0 || config.beta > 1.0) throw ConfigError(f + ": beta must lie in [0,1]");
    if (!saw_quantum)
        config.orders.order_quantum =
            config.refinement == grid::RefinementPath::ConstantDiffusion ? 0.5 : 1.0;
    config.orders.validate();

    if (config.cases.empty()) {
        if (!saw_ratio || !saw_segments || !saw_dt)
            throw ConfigError(f + ": missing grid keys (ratio, segments, dt) or 'case' entries");
        if (saw_levels && single.levels < 3) throw ConfigError(f + ": levels must be at least 3");
        config.cases.push_back(single);
    } else if (saw_ratio || saw_segments || saw_dt || saw_levels) {
        throw ConfigError(f + ": give either scalar grid keys or 'case' entries, not both");
    }
    if (config.protocol == Protocol::Single && config.cases.size() != 1)
        throw ConfigError(f + ": the single protocol takes exactly one grid");
    if (config.protocol == Protocol::TwoTier) {
        if (config.tiers < 1) throw ConfigError(f + ": tiers must be at least 1");
        config.midas = true;  // the protocol exists to compare shared vs objective support
        for (const GridCase& gc : config.cases)
            if (gc.levels != 3)
                throw ConfigError(f + ": two-tier cases are 3-level ladders refined globally");
    }
    return config;
}

void apply_overrides(StudyConfig& config, const Overrides& overrides) {
    if (overrides.out_dir) config.out_dir = *overrides.out_dir;
    if (overrides.midas) config.midas = *overrides.midas;
    if (overrides.beta) {
        if (*overrides.beta < 0.0 || *overrides.beta > 1.0)
            throw ConfigError("beta override must lie in [0,1]");
        config.beta = *overrides.beta;
    }
    if (overrides.levels) {
        if (*overrides.levels < 3) throw ConfigError("levels override must be at least 3");
        for (GridCase& gc : config.cases) gc.levels = *overrides.levels;
    }
}

}  // namespace poem::study
