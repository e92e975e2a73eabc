#pragma once

#include "simulate.hpp"

#include <toml.hpp>

#include <fstream>
#include <optional>
#include <sstream>

namespace porthamil::config {

// Validation failure carrying the offending field path.
struct config_error : std::invalid_argument {
    std::string field;
    config_error(std::string path, const std::string& msg)
        : std::invalid_argument(path + ": " + msg), field(std::move(path)) {}
};

struct Bump {
    double amplitude = 0.0, center = 0.0, width = 1.0;
};

// Initial state per side and component: polynomial in z plus Gaussian bumps.
struct InitialField {
    std::array<std::array<Poly, 2>, 2> poly{{{Poly{0.0}, Poly{0.0}}, {Poly{0.0}, Poly{0.0}}}};
    std::array<std::array<std::vector<Bump>, 2>, 2> bumps;

    Vec2 operator()(bool plus, double z) const {
        Vec2 v;
        for (int c = 0; c < 2; ++c) {
            double s = poly[plus][c](z);
            for (const auto& b : bumps[plus][c]) s += b.amplitude * std::exp(-std::pow((z - b.center) / b.width, 2));
            v(c) = s;
        }
        return v;
    }
};

struct Numerics {
    int n_minus = 0, n_plus = 0;
    double dt = 0.0, t_end = 0.0;
};

struct Config {
    std::string name;
    CoefficientProfile profile;
    Mat WB;
    double r = 0.0;
    MovingPath path;
    std::optional<double> reference;
    InitialField initial;
    std::optional<Numerics> numerics;
    std::optional<analytic::Region> region;
    std::uint64_t seed = 0;
    bool dump_generator = false;

    const Numerics& require_numerics() const {
        if (!numerics) throw config_error("numerics", "section required for this command");
        return *numerics;
    }

    simulate::Scenario scenario() const {
        const auto& n = require_numerics();
        simulate::Scenario s;
        s.profile = profile;
        s.WB = WB;
        s.r = r;
        s.path = path;
        s.reference = reference;
        s.initial = initial;
        s.dt = n.dt;
        s.t_end = n.t_end;
        s.n_minus = n.n_minus;
        s.n_plus = n.n_plus;
        return s;
    }

    analytic::FamilySpec family() const {
        return {path, profile, WB, r, numerics ? numerics->t_end : 1.0, reference.value_or(path(0.0))};
    }
};

namespace detail {

inline double number(const toml::node_view<const toml::node>& v, const std::string& path) {
    if (!v) throw config_error(path, "missing");
    if (auto d = v.value<double>()) return *d;
    throw config_error(path, "expected a number");
}

inline std::optional<double> maybe_number(const toml::node_view<const toml::node>& v, const std::string& path) {
    if (!v) return std::nullopt;
    return number(v, path);
}

inline int integer(const toml::node_view<const toml::node>& v, const std::string& path) {
    if (!v) throw config_error(path, "missing");
    if (!v.is_integer()) throw config_error(path, "expected an integer");
    return static_cast<int>(*v.value<std::int64_t>());
}

inline std::vector<double> numbers(const toml::node_view<const toml::node>& v, const std::string& path) {
    const auto* arr = v.as_array();
    if (!arr) throw config_error(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        auto d = (*arr)[i].value<double>();
        if (!d) throw config_error(path + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(*d);
    }
    return out;
}

inline Mat matrix(const toml::node_view<const toml::node>& v, const std::string& path, int rows, int cols) {
    const auto* arr = v.as_array();
    if (!arr || static_cast<int>(arr->size()) != rows)
        throw config_error(path, "expected " + std::to_string(rows) + " rows");
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const std::string rp = path + "[" + std::to_string(i) + "]";
        const auto row = numbers(v[static_cast<std::size_t>(i)], rp);
        if (static_cast<int>(row.size()) != cols) throw config_error(rp, "expected " + std::to_string(cols) + " entries");
        for (int j = 0; j < cols; ++j) m(i, j) = row[j];
    }
    return m;
}

struct SideProfile {
    bool full = false;
    bool constant = true;
    Mat2 value = Mat2::Identity();
    std::array<Poly, 2> diag{Poly{1.0}, Poly{1.0}};
};

inline SideProfile side_profile(const toml::node_view<const toml::node>& v, const std::string& path) {
    if (!v.is_table()) throw config_error(path, "missing table");
    const auto kind = v["kind"].value<std::string>();
    if (!kind) throw config_error(path + ".kind", "missing");
    SideProfile s;
    if (*kind == "constant_diagonal") {
        const auto d = numbers(v["diagonal"], path + ".diagonal");
        if (d.size() != 2) throw config_error(path + ".diagonal", "expected 2 entries");
        s.value = Vec2(d[0], d[1]).asDiagonal();
        s.diag = {Poly{d[0]}, Poly{d[1]}};
    } else if (*kind == "constant_full") {
        s.value = matrix(v["matrix"], path + ".matrix", 2, 2);
        s.full = true;
    } else if (*kind == "polynomial_diagonal") {
        s.diag = {Poly(numbers(v["q11"], path + ".q11")), Poly(numbers(v["q22"], path + ".q22"))};
        if (s.diag[0].c.empty() || s.diag[1].c.empty()) throw config_error(path, "empty coefficient list");
        s.constant = s.diag[0].degree() == 0 && s.diag[1].degree() == 0;
        s.value = Vec2(s.diag[0].c[0], s.diag[1].c[0]).asDiagonal();
    } else {
        throw config_error(path + ".kind", "unknown kind '" + *kind + "'");
    }
    return s;
}

inline Poly poly_or_zero(const toml::node_view<const toml::node>& v, const std::string& path) {
    if (!v) return Poly{0.0};
    auto c = numbers(v, path);
    return c.empty() ? Poly{0.0} : Poly(std::move(c));
}

inline std::vector<Bump> bumps(const toml::node_view<const toml::node>& v, const std::string& path) {
    std::vector<Bump> out;
    if (!v) return out;
    const auto* arr = v.as_array();
    if (!arr) throw config_error(path, "expected an array of [amplitude, center, width]");
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const std::string bp = path + "[" + std::to_string(i) + "]";
        const auto b = numbers(v[i], bp);
        if (b.size() != 3) throw config_error(bp, "expected [amplitude, center, width]");
        if (!(b[2] > 0)) throw config_error(bp, "width must be positive");
        out.push_back({b[0], b[1], b[2]});
    }
    return out;
}

}  // namespace detail

inline Config from_table(const toml::table& root) {
    using namespace detail;
    const toml::node_view<const toml::node> t{root};
    Config c;
    c.name = t["name"].value_or(std::string("unnamed"));
    if (auto s = t["seed"]) {
        if (!s.is_integer() || *s.value<std::int64_t>() < 0) throw config_error("seed", "expected a nonnegative integer");
        c.seed = static_cast<std::uint64_t>(*s.value<std::int64_t>());
    }

    const double a = number(t["domain"]["a"], "domain.a");
    const double b = number(t["domain"]["b"], "domain.b");
    if (!(a < b)) throw config_error("domain", "a must be less than b");

    const auto pm = side_profile(t["profile"]["minus"], "profile.minus");
    const auto pp = side_profile(t["profile"]["plus"], "profile.plus");
    try {
        if (pm.constant && pp.constant) {
            c.profile = constant_profile(a, b, pm.value, pp.value);
        } else {
            if (pm.full || pp.full) throw config_error("profile", "full matrices must be constant on both sides");
            c.profile = polynomial_diagonal_profile(a, b, pm.diag, pp.diag);
        }
    } catch (const config_error&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw config_error("profile", e.what());
    }

    const auto bnd = t["boundary"];
    if (!bnd.is_table()) throw config_error("boundary", "missing table");
    const auto bkind = bnd["kind"].value_or(std::string("matrix"));
    if (bkind == "matrix") {
        c.WB = matrix(bnd["wb"], "boundary.wb", 2, 4);
    } else if (bkind == "transmission_line") {
        const double rb = number(bnd["resistance"], "boundary.resistance");
        if (!(rb >= 0)) throw config_error("boundary.resistance", "must be nonnegative");
        c.WB.resize(2, 4);
        c.WB << 0, 1, 1, 0, -rb, 1, -1, rb;
        c.WB /= std::sqrt(2.0);
    } else {
        throw config_error("boundary.kind", "unknown kind '" + bkind + "'");
    }

    const auto ifc = t["interface"];
    if (!ifc.is_table()) throw config_error("interface", "missing table");
    c.r = number(ifc["r"], "interface.r");
    if (c.r < 0) throw config_error("interface.r", "must be nonnegative");
    c.path.l0 = number(ifc["l0"], "interface.l0");
    const auto pkind = ifc["path"].value_or(std::string("fixed"));
    if (pkind == "fixed") {
        c.path.kind = MovingPath::Kind::fixed;
    } else if (pkind == "linear") {
        c.path.kind = MovingPath::Kind::linear;
        c.path.speed = number(ifc["speed"], "interface.speed");
    } else if (pkind == "sinusoidal") {
        c.path.kind = MovingPath::Kind::sinusoidal;
        c.path.amplitude = number(ifc["amplitude"], "interface.amplitude");
        c.path.frequency = number(ifc["frequency"], "interface.frequency");
    } else {
        throw config_error("interface.path", "unknown kind '" + pkind + "'");
    }
    if (!(a < c.path.l0 && c.path.l0 < b)) throw config_error("interface.l0", "must lie strictly inside the domain");
    c.reference = maybe_number(ifc["reference"], "interface.reference");

    for (int side = 0; side < 2; ++side) {
        const std::string sp = side ? "initial.plus" : "initial.minus";
        const auto s = t["initial"][side ? "plus" : "minus"];
        for (int comp = 0; comp < 2; ++comp) {
            const std::string key = comp ? "x2" : "x1";
            c.initial.poly[side][comp] = poly_or_zero(s[key], sp + "." + key);
            c.initial.bumps[side][comp] = bumps(s[key + "_bumps"], sp + "." + key + "_bumps");
        }
    }

    if (const auto n = t["numerics"]; n) {
        Numerics num;
        num.n_minus = integer(n["n_minus"], "numerics.n_minus");
        num.n_plus = integer(n["n_plus"], "numerics.n_plus");
        num.dt = number(n["dt"], "numerics.dt");
        num.t_end = number(n["t_end"], "numerics.t_end");
        if (num.n_minus < 4) throw config_error("numerics.n_minus", "must be at least 4");
        if (num.n_plus < 4) throw config_error("numerics.n_plus", "must be at least 4");
        if (!(num.dt > 0)) throw config_error("numerics.dt", "must be positive");
        if (!(num.t_end >= 0)) throw config_error("numerics.t_end", "must be nonnegative");
        c.numerics = num;
    }

    if (const auto s = t["spectrum"]; s) {
        const auto reg = numbers(s["region"], "spectrum.region");
        if (reg.size() != 4) throw config_error("spectrum.region", "expected [re_min, re_max, im_min, im_max]");
        c.region = analytic::Region{reg[0], reg[1], reg[2], reg[3]};
    }
    c.dump_generator = t["output"]["dump_generator"].value_or(false);
    return c;
}

inline Config parse_string(std::string_view text, std::string_view source = "config") {
    try {
        return from_table(toml::parse(text, source));
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << e.description() << " (line " << e.source().begin.line << ")";
        throw config_error(std::string(source), os.str());
    }
}

inline Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error(path, "cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

}  // namespace porthamil::config
