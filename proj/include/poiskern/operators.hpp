#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace poiskern {

inline constexpr double kInfiniteR = std::numeric_limits<double>::infinity();

// One-dimensional coefficient on [0, R): evaluatable, exactly integrable
// for the built-in families, and serialisable for manifests.  Immutable;
// the transform constructors (reflected/shifted/negated) share the base.
class Coefficient {
public:
    Coefficient() = default;  // identically zero

    static Coefficient zero() { return Coefficient(); }
    static Coefficient constant(double c);
    // prefactor * y^exponent on y > 0; exponent > -1 keeps it locally integrable
    static Coefficient power(double prefactor, double exponent);
    // piecewise linear through (y_i, v_i); constant continuation outside
    static Coefficient table(std::vector<std::pair<double, double>> points);

    Coefficient reflected(double pivot) const;  // y -> f(pivot - y)
    Coefficient shifted(double offset) const;   // y -> f(offset + y)
    Coefficient negated() const;

    double operator()(double y) const;
    double integral(double lo, double hi) const;         // int f
    double square_integral(double lo, double hi) const;  // int f^2
    bool is_zero() const;

    nlohmann::json to_json() const;
    static Coefficient from_json(const nlohmann::json& j);

private:
    enum class Kind { Zero, Constant, Power, Table, Reflected, Shifted, Negated };
    struct Node;
    std::shared_ptr<const Node> node_;
};

struct Atom {
    double y = 0;
    double w = 0;
};

// Operator data (a, b, R): second-order generator on the strip [0, R) x R
// with diffusion measure a (density + atoms), drift coefficient b, and
// upper boundary R (possibly infinite).
struct OperatorSpec {
    double R = kInfiniteR;
    Coefficient a_density;
    Coefficient b;
    std::vector<Atom> atoms;  // sorted by y; y in [0, R), distinct, weights > 0

    void validate() const;  // throws std::invalid_argument on malformed data
    double atom_at_zero() const;

    nlohmann::json to_json() const;
    static OperatorSpec from_json(const nlohmann::json& j);
    std::string hash() const;
};

// Scale-invariant family: a(y) = p^2 y^{2/mu - 2}, b(y) = -q y^{1/mu - 1},
// R infinite; mu in (0,2), not both p and q zero.
OperatorSpec make_homogeneous(double p, double q, double mu);

// Constant diffusion a0 on a finite strip of height R.
OperatorSpec make_strip(double a0, double R);

// Constant diffusion a0 on the half-plane.
OperatorSpec make_halfplane(double a0 = 1.0);

// Single interior atom of weight w at height y0 > 0, no density, R infinite.
OperatorSpec make_atom_spec(double w, double y0);

struct MeshCell {
    double lo = 0, hi = 0;
    double a_avg = 0, b_avg = 0, b2_avg = 0;
};

struct Mesh {
    std::vector<double> nodes;       // ascending, nodes.front() == 0
    std::vector<MeshCell> cells;     // cells[i] spans [nodes[i], nodes[i+1]]
    std::vector<double> node_atom;   // atom weight sitting exactly at nodes[i]

    double y_max() const { return nodes.back(); }
    int cell_count() const { return static_cast<int>(cells.size()); }
    // index of the cell containing y (clamped to the ends)
    int locate(double y) const;
};

// Geometrically graded mesh on [0, y_max]: cell sizes shrink toward 0 with
// the given ratio, capped above by y_max / n_cells.  Atom locations below
// y_max and all required points become nodes.  Cell averages of a, b, b^2
// are exact for the built-in coefficient families.
Mesh build_mesh(const OperatorSpec& spec, double y_max, int n_cells, double grading = 1.15,
                const std::vector<double>& required = {});

// Split every cell of m at its midpoint (nodes of m are preserved).
Mesh refine_mesh(const OperatorSpec& spec, const Mesh& m);

}  // namespace poiskern
