#include "poiskern/operators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "poiskern/hash.hpp"
#include "poiskern/quadrature.hpp"

namespace poiskern {

struct Coefficient::Node {
    Kind kind = Kind::Zero;
    double c0 = 0;  // constant value / power prefactor / pivot / offset
    double c1 = 0;  // power exponent
    std::vector<std::pair<double, double>> pts;
    std::shared_ptr<const Node> base;
};

namespace {

using CoeffNode = void;  // placeholder to keep the anonymous namespace non-empty

double table_eval(const std::vector<std::pair<double, double>>& pts, double y) {
    if (pts.empty()) return 0;
    if (y <= pts.front().first) return pts.front().second;
    if (y >= pts.back().first) return pts.back().second;
    auto it = std::upper_bound(pts.begin(), pts.end(), y,
                               [](double v, const auto& p) { return v < p.first; });
    auto hi = it;
    auto lo = it - 1;
    double t = (y - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

}  // namespace

Coefficient Coefficient::constant(double c) {
    if (c == 0) return zero();
    auto n = std::make_shared<Node>();
    n->kind = Kind::Constant;
    n->c0 = c;
    Coefficient out;
    out.node_ = n;
    return out;
}

Coefficient Coefficient::power(double prefactor, double exponent) {
    if (prefactor == 0) return zero();
    if (exponent == 0) return constant(prefactor);
    if (exponent <= -1)
        throw std::invalid_argument("Coefficient::power: exponent <= -1 is not locally integrable");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Power;
    n->c0 = prefactor;
    n->c1 = exponent;
    Coefficient out;
    out.node_ = n;
    return out;
}

Coefficient Coefficient::table(std::vector<std::pair<double, double>> points) {
    if (points.empty()) return zero();
    if (!std::is_sorted(points.begin(), points.end(),
                        [](const auto& a, const auto& b) { return a.first < b.first; }))
        throw std::invalid_argument("Coefficient::table: abscissae must be increasing");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Table;
    n->pts = std::move(points);
    Coefficient out;
    out.node_ = n;
    return out;
}

Coefficient Coefficient::reflected(double pivot) const {
    if (is_zero()) return zero();
    auto n = std::make_shared<Node>();
    n->kind = Kind::Reflected;
    n->c0 = pivot;
    n->base = node_;
    Coefficient out;
    out.node_ = n;
    return out;
}

Coefficient Coefficient::shifted(double offset) const {
    if (is_zero() || offset == 0) return *this;
    auto n = std::make_shared<Node>();
    n->kind = Kind::Shifted;
    n->c0 = offset;
    n->base = node_;
    Coefficient out;
    out.node_ = n;
    return out;
}

Coefficient Coefficient::negated() const {
    if (is_zero()) return zero();
    auto n = std::make_shared<Node>();
    n->kind = Kind::Negated;
    n->base = node_;
    Coefficient out;
    out.node_ = n;
    return out;
}

bool Coefficient::is_zero() const { return !node_ || node_->kind == Kind::Zero; }

double Coefficient::operator()(double y) const {
    if (!node_) return 0;
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::Zero:
            return 0;
        case Kind::Constant:
            return n.c0;
        case Kind::Power:
            if (y <= 0) return n.c1 > 0 ? 0 : n.c0 * std::pow(1e-300, n.c1);
            return n.c0 * std::pow(y, n.c1);
        case Kind::Table:
            return table_eval(n.pts, y);
        case Kind::Reflected: {
            Coefficient b;
            b.node_ = n.base;
            return b(n.c0 - y);
        }
        case Kind::Shifted: {
            Coefficient b;
            b.node_ = n.base;
            return b(n.c0 + y);
        }
        case Kind::Negated: {
            Coefficient b;
            b.node_ = n.base;
            return -b(y);
        }
    }
    return 0;
}

double Coefficient::integral(double lo, double hi) const {
    if (!(hi >= lo)) throw std::invalid_argument("Coefficient::integral: need lo <= hi");
    if (hi == lo || is_zero()) return 0;
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::Zero:
            return 0;
        case Kind::Constant:
            return n.c0 * (hi - lo);
        case Kind::Power: {
            double e = n.c1 + 1;
            double a = lo <= 0 ? 0.0 : std::pow(lo, e);
            return n.c0 * (std::pow(hi, e) - a) / e;
        }
        case Kind::Table: {
            // exact for a piecewise-linear table: trapezoids between knots
            Coefficient self;
            self.node_ = node_;
            std::vector<double> bp{lo};
            for (const auto& [y, v] : n.pts)
                if (y > lo && y < hi) bp.push_back(y);
            bp.push_back(hi);
            double s = 0;
            for (std::size_t i = 0; i + 1 < bp.size(); ++i)
                s += 0.5 * (self(bp[i]) + self(bp[i + 1])) * (bp[i + 1] - bp[i]);
            return s;
        }
        case Kind::Reflected: {
            Coefficient b;
            b.node_ = n.base;
            return b.integral(n.c0 - hi, n.c0 - lo);
        }
        case Kind::Shifted: {
            Coefficient b;
            b.node_ = n.base;
            return b.integral(n.c0 + lo, n.c0 + hi);
        }
        case Kind::Negated: {
            Coefficient b;
            b.node_ = n.base;
            return -b.integral(lo, hi);
        }
    }
    return 0;
}

double Coefficient::square_integral(double lo, double hi) const {
    if (!(hi >= lo)) throw std::invalid_argument("Coefficient::square_integral: need lo <= hi");
    if (hi == lo || is_zero()) return 0;
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::Zero:
            return 0;
        case Kind::Constant:
            return n.c0 * n.c0 * (hi - lo);
        case Kind::Power: {
            double e = 2 * n.c1 + 1;
            if (e <= 0)
                throw std::invalid_argument("Coefficient::square_integral: b^2 not locally integrable");
            double a = lo <= 0 ? 0.0 : std::pow(lo, e);
            return n.c0 * n.c0 * (std::pow(hi, e) - a) / e;
        }
        case Kind::Table: {
            // f is linear between knots, so f^2 is quadratic: Simpson is exact
            Coefficient self;
            self.node_ = node_;
            std::vector<double> bp{lo};
            for (const auto& [y, v] : n.pts)
                if (y > lo && y < hi) bp.push_back(y);
            bp.push_back(hi);
            double s = 0;
            for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
                const double u = bp[i], w = bp[i + 1];
                const double fu = self(u), fm = self(0.5 * (u + w)), fw = self(w);
                s += (w - u) / 6.0 * (fu * fu + 4.0 * fm * fm + fw * fw);
            }
            return s;
        }
        case Kind::Reflected: {
            Coefficient b;
            b.node_ = n.base;
            return b.square_integral(n.c0 - hi, n.c0 - lo);
        }
        case Kind::Shifted: {
            Coefficient b;
            b.node_ = n.base;
            return b.square_integral(n.c0 + lo, n.c0 + hi);
        }
        case Kind::Negated: {
            Coefficient b;
            b.node_ = n.base;
            return b.square_integral(lo, hi);
        }
    }
    return 0;
}

nlohmann::json Coefficient::to_json() const {
    if (!node_) return {{"kind", "zero"}};
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::Zero:
            return {{"kind", "zero"}};
        case Kind::Constant:
            return {{"kind", "constant"}, {"value", n.c0}};
        case Kind::Power:
            return {{"kind", "power"}, {"prefactor", n.c0}, {"exponent", n.c1}};
        case Kind::Table: {
            nlohmann::json pts = nlohmann::json::array();
            for (const auto& [y, v] : n.pts) pts.push_back({y, v});
            return {{"kind", "table"}, {"points", pts}};
        }
        case Kind::Reflected: {
            Coefficient b;
            b.node_ = n.base;
            return {{"kind", "reflected"}, {"pivot", n.c0}, {"base", b.to_json()}};
        }
        case Kind::Shifted: {
            Coefficient b;
            b.node_ = n.base;
            return {{"kind", "shifted"}, {"offset", n.c0}, {"base", b.to_json()}};
        }
        case Kind::Negated: {
            Coefficient b;
            b.node_ = n.base;
            return {{"kind", "negated"}, {"base", b.to_json()}};
        }
    }
    return {{"kind", "zero"}};
}

Coefficient Coefficient::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "zero") return zero();
    if (kind == "constant") return constant(j.at("value").get<double>());
    if (kind == "power") return power(j.at("prefactor").get<double>(), j.at("exponent").get<double>());
    if (kind == "table") {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : j.at("points")) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        return table(std::move(pts));
    }
    if (kind == "reflected") return from_json(j.at("base")).reflected(j.at("pivot").get<double>());
    if (kind == "shifted") return from_json(j.at("base")).shifted(j.at("offset").get<double>());
    if (kind == "negated") return from_json(j.at("base")).negated();
    throw std::invalid_argument("Coefficient::from_json: unknown kind '" + kind + "'");
}

void OperatorSpec::validate() const {
    if (!(R > 0)) throw std::invalid_argument("OperatorSpec: R must be positive (or infinite)");
    double prev = -1;
    for (const Atom& a : atoms) {
        if (!(a.w > 0)) throw std::invalid_argument("OperatorSpec: atom weights must be positive");
        if (!(a.y >= 0) || !(a.y < R))
            throw std::invalid_argument("OperatorSpec: atom locations must lie in [0, R)");
        if (a.y <= prev) throw std::invalid_argument("OperatorSpec: atoms must be sorted and distinct");
        prev = a.y;
    }
}

double OperatorSpec::atom_at_zero() const {
    for (const Atom& a : atoms)
        if (a.y == 0) return a.w;
    return 0;
}

nlohmann::json OperatorSpec::to_json() const {
    nlohmann::json j;
    if (std::isinf(R))
        j["R"] = "inf";
    else
        j["R"] = R;
    j["a"] = a_density.to_json();
    j["b"] = b.to_json();
    nlohmann::json atoms_j = nlohmann::json::array();
    for (const Atom& a : atoms) atoms_j.push_back({{"y", a.y}, {"w", a.w}});
    j["atoms"] = atoms_j;
    return j;
}

OperatorSpec OperatorSpec::from_json(const nlohmann::json& j) {
    OperatorSpec spec;
    if (j.contains("R")) {
        if (j["R"].is_string()) {
            if (j["R"].get<std::string>() != "inf")
                throw std::invalid_argument("OperatorSpec: R must be a number or \"inf\"");
            spec.R = kInfiniteR;
        } else {
            spec.R = j["R"].get<double>();
        }
    }
    if (j.contains("family")) {
        const auto& fam = j["family"];
        std::string name;
        nlohmann::json params;
        if (fam.is_string()) {
            name = fam.get<std::string>();
            params = j;  // flat form: parameters sit beside "family"
        } else {
            name = fam.at("name").get<std::string>();
            params = fam.value("params", nlohmann::json::object());
        }
        if (name == "homogeneous") {
            OperatorSpec h = make_homogeneous(params.at("p").get<double>(), params.at("q").get<double>(),
                                              params.at("mu").get<double>());
            spec.a_density = h.a_density;
            spec.b = h.b;
            if (!j.contains("R")) spec.R = kInfiniteR;
        } else if (name == "strip" || name == "constant" || name == "halfplane") {
            spec.a_density = Coefficient::constant(params.value("a0", 1.0));
            if (name == "halfplane") spec.R = kInfiniteR;
        } else if (name == "atom") {
            if (params.contains("w") || params.contains("y0"))
                spec.atoms.push_back({params.at("y0").get<double>(), params.at("w").get<double>()});
        } else if (name == "zero") {
            // nothing beyond the atom list
        } else {
            throw std::invalid_argument("OperatorSpec: unknown family '" + name + "'");
        }
    } else if (j.contains("table")) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : j["table"]) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        spec.a_density = Coefficient::table(std::move(pts));
        if (j.contains("b_table")) {
            std::vector<std::pair<double, double>> bts;
            for (const auto& p : j["b_table"]) bts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            spec.b = Coefficient::table(std::move(bts));
        }
    } else if (j.contains("a")) {
        spec.a_density = Coefficient::from_json(j["a"]);
        if (j.contains("b")) spec.b = Coefficient::from_json(j["b"]);
    } else {
        throw std::invalid_argument("OperatorSpec: need one of \"family\", \"table\", \"a\"");
    }
    if (j.contains("atoms")) {
        for (const auto& a : j["atoms"]) spec.atoms.push_back({a.at("y").get<double>(), a.at("w").get<double>()});
        std::sort(spec.atoms.begin(), spec.atoms.end(), [](const Atom& x, const Atom& y) { return x.y < y.y; });
    }
    spec.validate();
    return spec;
}

std::string OperatorSpec::hash() const { return hex_hash(to_json().dump()); }

OperatorSpec make_homogeneous(double p, double q, double mu) {
    if (!(mu > 0 && mu < 2)) throw std::invalid_argument("make_homogeneous: need mu in (0,2)");
    if (p == 0 && q == 0) throw std::invalid_argument("make_homogeneous: p and q cannot both vanish");
    OperatorSpec spec;
    spec.R = kInfiniteR;
    if (p != 0) spec.a_density = Coefficient::power(p * p, 2.0 / mu - 2.0);
    if (q != 0) spec.b = Coefficient::power(-q, 1.0 / mu - 1.0);
    return spec;
}

OperatorSpec make_strip(double a0, double R) {
    if (!(a0 > 0)) throw std::invalid_argument("make_strip: need a0 > 0");
    if (!(R > 0) || std::isinf(R)) throw std::invalid_argument("make_strip: need finite R > 0");
    OperatorSpec spec;
    spec.R = R;
    spec.a_density = Coefficient::constant(a0);
    return spec;
}

OperatorSpec make_halfplane(double a0) {
    if (!(a0 > 0)) throw std::invalid_argument("make_halfplane: need a0 > 0");
    OperatorSpec spec;
    spec.R = kInfiniteR;
    spec.a_density = Coefficient::constant(a0);
    return spec;
}

OperatorSpec make_atom_spec(double w, double y0) {
    if (!(w > 0) || !(y0 > 0)) throw std::invalid_argument("make_atom_spec: need w > 0 and y0 > 0");
    OperatorSpec spec;
    spec.R = kInfiniteR;
    spec.atoms.push_back({y0, w});
    return spec;
}

int Mesh::locate(double y) const {
    if (y <= nodes.front()) return 0;
    if (y >= nodes.back()) return cell_count() - 1;
    auto it = std::upper_bound(nodes.begin(), nodes.end(), y);
    return static_cast<int>(it - nodes.begin()) - 1;
}

namespace {

MeshCell make_cell(const OperatorSpec& spec, double lo, double hi) {
    MeshCell c;
    c.lo = lo;
    c.hi = hi;
    double h = hi - lo;
    c.a_avg = spec.a_density.integral(lo, hi) / h;
    c.b_avg = spec.b.integral(lo, hi) / h;
    c.b2_avg = spec.b.square_integral(lo, hi) / h;
    if (!std::isfinite(c.a_avg) || !std::isfinite(c.b_avg) || !std::isfinite(c.b2_avg))
        throw std::invalid_argument("build_mesh: coefficient not integrable on a cell");
    return c;
}

Mesh assemble(const OperatorSpec& spec, const std::vector<double>& nodes) {
    Mesh m;
    m.nodes = nodes;
    m.cells.reserve(nodes.size() - 1);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) m.cells.push_back(make_cell(spec, nodes[i], nodes[i + 1]));
    m.node_atom.assign(nodes.size(), 0.0);
    for (const Atom& a : spec.atoms) {
        if (a.y >= m.y_max()) continue;
        auto it = std::lower_bound(nodes.begin(), nodes.end(), a.y);
        if (it != nodes.end() && *it == a.y) m.node_atom[it - nodes.begin()] = a.w;
        // atoms not on a node were filtered out by build_mesh's node insertion
    }
    return m;
}

}  // namespace

Mesh build_mesh(const OperatorSpec& spec, double y_max, int n_cells, double grading,
                const std::vector<double>& required) {
    spec.validate();
    if (!(y_max > 0) || std::isinf(y_max)) throw std::invalid_argument("build_mesh: need finite y_max > 0");
    if (y_max > spec.R * (1 + 1e-12)) throw std::invalid_argument("build_mesh: y_max exceeds R");
    if (n_cells < 1) throw std::invalid_argument("build_mesh: need n_cells >= 1");
    if (!(grading > 1)) throw std::invalid_argument("build_mesh: grading ratio must exceed 1");

    // geometric levels y_max, y_max/g, ... down to a small fraction of y_max,
    // each level then chopped into pieces no longer than y_max / n_cells
    std::set<double> nodes{0.0, y_max};
    const double floor_frac = 1e-8;
    for (double level = y_max / grading; level > floor_frac * y_max; level /= grading) nodes.insert(level);
    for (const Atom& a : spec.atoms)
        if (a.y > 0 && a.y < y_max) nodes.insert(a.y);
    for (double r : required) {
        if (r < 0 || r > y_max * (1 + 1e-12)) continue;
        if (r > 0 && r < y_max) nodes.insert(r);
    }

    std::vector<double> base(nodes.begin(), nodes.end());
    std::vector<double> full;
    full.reserve(base.size() + n_cells);
    const double h_cap = y_max / n_cells;
    for (std::size_t i = 0; i + 1 < base.size(); ++i) {
        full.push_back(base[i]);
        double len = base[i + 1] - base[i];
        int pieces = static_cast<int>(std::ceil(len / h_cap - 1e-12));
        for (int k = 1; k < pieces; ++k) full.push_back(base[i] + len * k / pieces);
    }
    full.push_back(base.back());
    return assemble(spec, full);
}

Mesh refine_mesh(const OperatorSpec& spec, const Mesh& m) {
    std::vector<double> nodes;
    nodes.reserve(2 * m.nodes.size());
    for (std::size_t i = 0; i + 1 < m.nodes.size(); ++i) {
        nodes.push_back(m.nodes[i]);
        nodes.push_back(0.5 * (m.nodes[i] + m.nodes[i + 1]));
    }
    nodes.push_back(m.nodes.back());
    return assemble(spec, nodes);
}

}  // namespace poiskern
