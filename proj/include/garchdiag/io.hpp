#pragma once

#include "garchdiag/diagnostics.hpp"
#include "garchdiag/errors.hpp"
#include "garchdiag/garch_core.hpp"
#include "garchdiag/kde.hpp"
#include "garchdiag/montecarlo.hpp"
#include "garchdiag/psp.hpp"
#include "garchdiag/qmle.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace garchdiag {

/// X_0 plus at least 100 observations.
inline constexpr std::size_t kMinSeriesRows = 101;

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

inline std::string full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/**
 * @brief Reads a one-column series, first value X_0.
 *
 * Blank lines are ignored and a leading "x" header is skipped. Row numbers in
 * errors are 1-based file lines.
 */
inline std::vector<double> parse_series(std::istream& in, std::size_t min_rows = 0) {
    std::vector<double> out;
    std::string line;
    std::size_t row = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++row;
        const auto cell = detail::trim(line);
        if (cell.empty()) continue;
        if (first) {
            first = false;
            std::string lower = cell;
            std::transform(lower.begin(), lower.end(), lower.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (lower == "x" || lower == "\"x\"") continue;
        }
        double v = 0.0;
        if (!detail::parse_double(cell, v)) {
            throw Error(ErrorCode::ParseError,
                        "row " + std::to_string(row) + ": cannot parse '" + cell + "'");
        }
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFiniteValue, "row " + std::to_string(row));
        }
        out.push_back(v);
    }
    if (out.size() < min_rows) {
        throw Error(ErrorCode::TooShort, "series has " + std::to_string(out.size()) +
                                             " rows, need at least " + std::to_string(min_rows));
    }
    return out;
}

inline std::vector<double> load_series(const std::string& path, std::size_t min_rows = 0) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
    return parse_series(in, min_rows);
}

inline void write_series(std::ostream& out, std::span<const double> x) {
    out << "x\n";
    for (double v : x) out << detail::full_precision(v) << '\n';
}

/// Ordered flat key=value record; one pair per line.
struct KeyValueRecord {
    std::vector<std::pair<std::string, std::string>> entries;

    void set(std::string key, std::string value) {
        for (auto& [k, v] : entries) {
            if (k == key) {
                v = std::move(value);
                return;
            }
        }
        entries.emplace_back(std::move(key), std::move(value));
    }

    [[nodiscard]] const std::string* find(std::string_view key) const {
        for (const auto& [k, v] : entries) {
            if (k == key) return &v;
        }
        return nullptr;
    }

    [[nodiscard]] const std::string& at(std::string_view key) const {
        if (const auto* v = find(key)) return *v;
        throw Error(ErrorCode::ParseError, "missing key '" + std::string(key) + "'");
    }

    bool operator==(const KeyValueRecord&) const = default;
};

inline std::string serialize(const KeyValueRecord& r) {
    std::string s;
    for (const auto& [k, v] : r.entries) {
        if (k.empty() || k.find_first_of("=\n") != std::string::npos ||
            v.find('\n') != std::string::npos) {
            throw Error(ErrorCode::InvalidArgument, "record key/value not serialisable: " + k);
        }
        s += k;
        s += '=';
        s += v;
        s += '\n';
    }
    return s;
}

inline KeyValueRecord parse_record(std::string_view text) {
    KeyValueRecord r;
    std::size_t row = 0;
    while (!text.empty()) {
        ++row;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": expected key=value");
        }
        r.entries.emplace_back(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    }
    return r;
}

/// Report numbers carry 6 significant digits.
inline KeyValueRecord to_record(const TestReport& rep) {
    KeyValueRecord r;
    r.set("name", rep.name);
    r.set("statistic", detail::fmt6(rep.statistic));
    r.set("p_value", detail::fmt6(rep.p_value));
    r.set("critical_value", detail::fmt6(rep.critical_value));
    r.set("level", detail::fmt6(rep.level));
    r.set("reject", rep.reject ? "true" : "false");
    r.set("n", std::to_string(rep.n));
    for (const auto& [k, v] : rep.provenance) r.set("provenance." + k, v);
    return r;
}

inline TestReport report_from_record(const KeyValueRecord& r) {
    auto num = [&](std::string_view key) {
        double v = 0.0;
        if (!detail::parse_double(r.at(key), v)) {
            throw Error(ErrorCode::ParseError, "bad number for '" + std::string(key) + "'");
        }
        return v;
    };
    TestReport rep;
    rep.name = r.at("name");
    rep.statistic = num("statistic");
    rep.p_value = num("p_value");
    rep.critical_value = num("critical_value");
    rep.level = num("level");
    rep.reject = r.at("reject") == "true";
    rep.n = static_cast<std::size_t>(num("n"));
    constexpr std::string_view prefix = "provenance.";
    for (const auto& [k, v] : r.entries) {
        if (k.starts_with(prefix)) rep.provenance[k.substr(prefix.size())] = v;
    }
    return rep;
}

inline std::string theta_string(const GarchParams& th) {
    std::string s;
    for (double v : th.to_vector()) {
        if (!s.empty()) s += ',';
        s += detail::fmt6(v);
    }
    return s;
}

inline KeyValueRecord to_record(const FitResult& fr) {
    KeyValueRecord r;
    const auto v = fr.theta_hat.to_vector();
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::string key = fr.theta_hat.coordinate_name(i);
        key.erase(std::remove(key.begin(), key.end(), '['), key.end());
        key.erase(std::remove(key.begin(), key.end(), ']'), key.end());
        r.set(key, detail::fmt6(v[i]));
    }
    r.set("loglik", detail::fmt6(fr.loglik));
    r.set("iterations", std::to_string(fr.iterations));
    r.set("converged", fr.converged ? "true" : "false");
    r.set("n", std::to_string(fr.n));
    return r;
}

/// Comma-separated theta "a0,a1..ap,b1..bq" split by the given orders.
inline GarchParams parse_theta(std::string_view text, std::size_t p, std::size_t q) {
    std::vector<double> v;
    while (true) {
        const auto comma = text.find(',');
        const auto cell = detail::trim(text.substr(0, comma));
        double d = 0.0;
        if (!detail::parse_double(cell, d)) {
            throw Error(ErrorCode::UsageError, "--theta: cannot parse '" + cell + "'");
        }
        v.push_back(d);
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    if (v.size() != 1 + p + q) {
        throw Error(ErrorCode::UsageError, "--theta needs " + std::to_string(1 + p + q) +
                                               " values for p=" + std::to_string(p) +
                                               ", q=" + std::to_string(q));
    }
    return GarchParams::from_vector(v, p, q);
}

inline void write_table_csv(std::ostream& out, const McTable& table) {
    out << "scenario,n,rejection_rate,mc_se,fit_failure_rate\n";
    for (const auto& row : table.rows) {
        out << row.scenario << ',' << row.n << ',' << detail::full_precision(row.rejection_rate)
            << ',' << detail::full_precision(row.monte_carlo_se) << ','
            << detail::full_precision(row.fit_failure_rate) << '\n';
    }
}

inline void write_kde_csv(std::ostream& out, const KdeEstimate& est) {
    out << "x,density\n";
    for (std::size_t i = 0; i < est.grid.size(); ++i) {
        out << detail::full_precision(est.grid[i]) << ',' << detail::full_precision(est.density[i])
            << '\n';
    }
}

inline void write_process_csv(std::ostream& out, const StepProcess& s) {
    out << "u,value\n";
    const double n = static_cast<double>(s.n());
    for (std::size_t i = 1; i <= s.n(); ++i) {
        out << detail::full_precision(static_cast<double>(i) / n) << ','
            << detail::full_precision(s.values[i - 1]) << '\n';
    }
}

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                                const std::string& where) {
    if (!obj.is_object()) throw Error(ErrorCode::ParseError, where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw Error(ErrorCode::ParseError, "unknown key '" + key + "' in " + where);
        }
    }
}

inline GarchParams theta_from_json(const json& j, std::size_t p, std::size_t q,
                                   const std::string& where) {
    if (!j.is_array()) throw Error(ErrorCode::ParseError, where + " must be an array");
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 1 + p + q) {
        throw Error(ErrorCode::ParseError, where + " needs " + std::to_string(1 + p + q) + " values");
    }
    return GarchParams::from_vector(v, p, q);
}

inline Scenario scenario_from_json(const json& j, std::size_t p, std::size_t q) {
    reject_unknown_keys(j, {"type", "mu", "u_star", "theta_prime"}, "scenario");
    const auto type = j.at("type").get<std::string>();
    if (type == "null") return Scenario::null();
    const double u = j.value("u_star", 0.5);
    if (type == "mean-change") return Scenario::mean_change(j.at("mu").get<double>(), u);
    if (type == "variance-change") {
        return Scenario::variance_change(theta_from_json(j.at("theta_prime"), p, q, "theta_prime"), u);
    }
    throw Error(ErrorCode::ParseError, "unknown scenario type '" + type + "'");
}

}  // namespace detail

/**
 * @brief McExperimentConfig from JSON text. Unknown keys are errors.
 *
 * Keys: p, q, theta, scenario (object or array of objects with type
 * null | mean-change | variance-change), innovation {family: normal | t, dof},
 * n_list, replicates, level, statistic, master_seed, burn_in,
 * space {rho0, lower, upper}.
 */
inline McExperimentConfig parse_config(const std::string& text) {
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    try {
        detail::reject_unknown_keys(j,
                                    {"p", "q", "theta", "scenario", "innovation", "n_list",
                                     "replicates", "level", "statistic", "master_seed", "burn_in",
                                     "space"},
                                    "config");
        McExperimentConfig c;
        const std::size_t p = j.value("p", std::size_t{1});
        const std::size_t q = j.value("q", std::size_t{1});
        c.theta = detail::theta_from_json(j.at("theta"), p, q, "theta");
        c.scenarios.clear();
        if (!j.contains("scenario")) {
            c.scenarios.push_back(Scenario::null());
        } else if (j.at("scenario").is_array()) {
            for (const auto& s : j.at("scenario")) c.scenarios.push_back(detail::scenario_from_json(s, p, q));
        } else {
            c.scenarios.push_back(detail::scenario_from_json(j.at("scenario"), p, q));
        }
        if (j.contains("innovation")) {
            const auto& in = j.at("innovation");
            detail::reject_unknown_keys(in, {"family", "dof"}, "innovation");
            const auto fam = in.at("family").get<std::string>();
            if (fam == "normal") {
                c.innovation = InnovationSpec::normal();
            } else if (fam == "t") {
                c.innovation = InnovationSpec::student_t(in.at("dof").get<double>());
            } else {
                throw Error(ErrorCode::ParseError, "unknown innovation family '" + fam + "'");
            }
        }
        c.n_list = j.at("n_list").get<std::vector<std::size_t>>();
        c.replicates = j.value("replicates", c.replicates);
        c.level = j.value("level", c.level);
        if (j.contains("statistic")) c.statistic = parse_statistic(j.at("statistic").get<std::string>());
        c.master_seed = j.value("master_seed", c.master_seed);
        c.burn_in = j.value("burn_in", c.burn_in);
        if (j.contains("space")) {
            const auto& s = j.at("space");
            detail::reject_unknown_keys(s, {"rho0", "lower", "upper"}, "space");
            c.space.rho0 = s.value("rho0", c.space.rho0);
            c.space.lower = s.value("lower", c.space.lower);
            c.space.upper = s.value("upper", c.space.upper);
        }
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
}

}  // namespace garchdiag
