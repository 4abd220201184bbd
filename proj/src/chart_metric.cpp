#include "heatforms/chart_metric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace heatforms {

std::vector<MultiIndex> enumerate_multi_indices(int n, int max_order) {
    std::vector<MultiIndex> out;
    MultiIndex cur(n, 0);
    // ordered by total degree, lexicographic within a degree
    std::function<void(int, int)> rec = [&](int axis, int remaining) {
        if (axis == n - 1) {
            cur[axis] = remaining;
            out.push_back(cur);
            return;
        }
        for (int k = remaining; k >= 0; --k) {
            cur[axis] = k;
            rec(axis + 1, remaining - k);
        }
    };
    for (int total = 0; total <= max_order; ++total) rec(0, total);
    return out;
}

namespace {

const std::vector<MultiIndex>& index_table(int n, int max_order) {
    static std::vector<MultiIndex> tables[kMaxDim + 1][9];
    auto& t = tables[n][max_order];
    if (t.empty()) t = enumerate_multi_indices(n, max_order);
    return t;
}

constexpr int kAnalyticOrder = 5;

} // namespace

int ChartMetric::beta_rank(const MultiIndex& beta, int n, int max_order) {
    if ((int)beta.size() != n) throw std::invalid_argument("metric derivative: beta rank mismatch");
    if (order_of(beta) > max_order)
        throw std::invalid_argument("metric derivative order " + std::to_string(order_of(beta)) +
                                    " exceeds available order " + std::to_string(max_order));
    const auto& table = index_table(n, max_order);
    for (std::size_t r = 0; r < table.size(); ++r)
        if (table[r] == beta) return (int)r;
    throw std::logic_error("beta_rank: index not found");
}

ChartMetric ChartMetric::analytic(GridBox domain, const std::vector<std::vector<std::string>>& g) {
    std::vector<std::vector<Expression>> parsed(domain.n, std::vector<Expression>(domain.n));
    for (int i = 0; i < domain.n; ++i)
        for (int j = 0; j < domain.n; ++j) parsed[i][j] = Expression::parse(g[i][j], domain.n);
    return analytic_expressions(std::move(domain), std::move(parsed));
}

ChartMetric ChartMetric::analytic_expressions(GridBox domain, std::vector<std::vector<Expression>> g) {
    ChartMetric m;
    m.domain_ = std::move(domain);
    m.analytic_ = true;
    m.max_order_ = kAnalyticOrder;
    m.base_ = std::move(g);
    int n = m.domain_.n;
    if ((int)m.base_.size() != n) throw std::invalid_argument("ChartMetric: component matrix size");
    const auto& table = index_table(n, m.max_order_);
    m.exprs_.assign(n, std::vector<std::vector<Expression>>(n, std::vector<Expression>(table.size())));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            m.exprs_[i][j][0] = m.base_[i][j];
            // each table entry of positive order differentiates an earlier one
            for (std::size_t r = 1; r < table.size(); ++r) {
                const MultiIndex& b = table[r];
                int axis = 0;
                while (b[axis] == 0) ++axis;
                MultiIndex parent = b;
                parent[axis] -= 1;
                int pr = beta_rank(parent, n, m.max_order_);
                m.exprs_[i][j][r] = m.exprs_[i][j][pr].derivative(axis);
            }
        }
    return m;
}

ChartMetric ChartMetric::gridded(GridBox domain, std::vector<std::vector<GridFunction>> components,
                                 int max_derivative_order) {
    ChartMetric m;
    m.domain_ = std::move(domain);
    m.analytic_ = false;
    m.max_order_ = max_derivative_order;
    int n = m.domain_.n;
    if ((int)components.size() != n) throw std::invalid_argument("ChartMetric: component matrix size");
    const auto& table = index_table(n, m.max_order_);
    m.fields_.assign(n, std::vector<std::vector<GridFunction>>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            m.fields_[i][j].reserve(table.size());
            for (const auto& beta : table)
                m.fields_[i][j].push_back(finite_difference(components[i][j], beta));
        }
    return m;
}

ChartMetric ChartMetric::flat(GridBox domain) {
    int n = domain.n;
    std::vector<std::vector<std::string>> g(n, std::vector<std::string>(n, "0"));
    for (int i = 0; i < n; ++i) g[i][i] = "1";
    return analytic(std::move(domain), g);
}

double ChartMetric::grid_lookup(const GridFunction& f, const std::vector<double>& x) const {
    std::vector<int> idx(domain_.n);
    for (int a = 0; a < domain_.n; ++a) {
        double h = domain_.spacing(a);
        int i = (int)std::lround((x[a] - domain_.lo[a]) / h);
        if (domain_.periodic) {
            i = ((i % domain_.npts[a]) + domain_.npts[a]) % domain_.npts[a];
        } else {
            i = std::clamp(i, 0, domain_.npts[a] - 1);
        }
        idx[a] = i;
    }
    return f.values[domain_.flat_index(idx)];
}

double ChartMetric::component_ranked(int i, int j, const std::vector<double>& x, int rank) const {
    if (analytic_) return exprs_[i][j][rank].eval(x);
    return grid_lookup(fields_[i][j][rank], x);
}

double ChartMetric::component(int i, int j, const std::vector<double>& x,
                              const MultiIndex& beta) const {
    return component_ranked(i, j, x, beta_rank(beta, domain_.n, max_order_));
}

double ChartMetric::component(int i, int j, const std::vector<double>& x) const {
    return component_ranked(i, j, x, 0);
}

Eigen::MatrixXd ChartMetric::matrix(const std::vector<double>& x) const {
    int n = domain_.n;
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = component(i, j, x);
    return g;
}

Eigen::MatrixXd ChartMetric::inverse(const std::vector<double>& x) const {
    Eigen::MatrixXd g = matrix(x);
    double d = g.determinant();
    if (std::abs(d) < 1e-14) throw std::domain_error("ChartMetric: singular metric");
    return g.inverse();
}

double ChartMetric::det(const std::vector<double>& x) const { return matrix(x).determinant(); }

double ChartMetric::sqrt_det(const std::vector<double>& x) const {
    double d = det(x);
    if (d <= 0) throw std::domain_error("ChartMetric: non-positive det(g)");
    return std::sqrt(d);
}

namespace {

// all splits of `beta` into three ordered parts, with the multinomial weight
// of the generalized Leibniz rule
void enumerate_triples(const MultiIndex& beta,
                       const std::function<void(const MultiIndex&, const MultiIndex&,
                                                const MultiIndex&, double)>& visit) {
    int n = (int)beta.size();
    MultiIndex b1(n, 0), b2(n, 0), b3(n, 0);
    std::function<void(int, double)> rec = [&](int axis, double weight) {
        if (axis == n) {
            visit(b1, b2, b3, weight);
            return;
        }
        int total = beta[axis];
        for (int k1 = 0; k1 <= total; ++k1)
            for (int k2 = 0; k2 <= total - k1; ++k2) {
                int k3 = total - k1 - k2;
                b1[axis] = k1;
                b2[axis] = k2;
                b3[axis] = k3;
                double w = std::tgamma(total + 1.0) /
                           (std::tgamma(k1 + 1.0) * std::tgamma(k2 + 1.0) * std::tgamma(k3 + 1.0));
                rec(axis + 1, weight * w);
            }
    };
    rec(0, 1.0);
}

} // namespace

Eigen::MatrixXd ChartMetric::inverse_derivative(const std::vector<double>& x,
                                                const MultiIndex& beta) const {
    int n = domain_.n;
    if (order_of(beta) == 0) return inverse(x);
    int axis = 0;
    while (beta[axis] == 0) ++axis;
    MultiIndex rest = beta;
    rest[axis] -= 1;

    // ∂^rest of (∂_axis G) with ∂_axis G = -G (∂_axis g) G
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    enumerate_triples(rest, [&](const MultiIndex& b1, const MultiIndex& b2, const MultiIndex& b3,
                                double w) {
        Eigen::MatrixXd G1 = inverse_derivative(x, b1);
        MultiIndex bg = b2;
        bg[axis] += 1;
        Eigen::MatrixXd dg(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) dg(i, j) = component(i, j, x, bg);
        Eigen::MatrixXd G3 = inverse_derivative(x, b3);
        acc -= w * G1 * dg * G3;
    });
    return acc;
}

std::pair<double, double> ChartMetric::eigen_range(const std::vector<double>& x) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix(x));
    const auto& ev = es.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

double ChartMetric::derivative_sup(const std::vector<double>& x, int d) const {
    double sup = 0;
    const auto& table = index_table(domain_.n, max_order_);
    for (const auto& beta : table) {
        if (order_of(beta) != d) continue;
        for (int i = 0; i < domain_.n; ++i)
            for (int j = i; j < domain_.n; ++j)
                sup = std::max(sup, std::abs(component(i, j, x, beta)));
    }
    return sup;
}

void ChartMetric::validate() const {
    for (std::size_t p = 0; p < domain_.size(); ++p) {
        auto x = domain_.point(p);
        Eigen::MatrixXd g = matrix(x);
        if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::domain_error("ChartMetric: non-symmetric metric at a grid point");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
        if (es.eigenvalues().minCoeff() <= 0)
            throw std::domain_error("ChartMetric: metric not positive definite at a grid point");
        Eigen::MatrixXd prod = g * g.inverse();
        if ((prod - Eigen::MatrixXd::Identity(domain_.n, domain_.n)).cwiseAbs().maxCoeff() > 1e-10)
            throw std::domain_error("ChartMetric: inverse check failed");
    }
}

ChartMetric load_metric_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open metric file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_metric_json(ss.str());
}

ChartMetric parse_metric_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    int n = j.at("n").get<int>();
    auto jb = j.at("box");
    GridBox box(n, jb.at("lo").get<std::vector<double>>(), jb.at("hi").get<std::vector<double>>(),
                jb.at("npts").get<std::vector<int>>(), jb.value("periodic", false));
    auto jm = j.at("metric");
    std::string type = jm.at("type").get<std::string>();
    if (type == "analytic") {
        auto g = jm.at("g").get<std::vector<std::vector<std::string>>>();
        if ((int)g.size() != n) throw std::runtime_error("metric json: g must be n x n");
        ChartMetric m = ChartMetric::analytic(box, g);
        m.validate();
        return m;
    }
    if (type == "grid") {
        auto arrays = jm.at("g").get<std::vector<std::vector<std::vector<double>>>>();
        if ((int)arrays.size() != n) throw std::runtime_error("metric json: g must be n x n");
        std::vector<std::vector<GridFunction>> comp(n, std::vector<GridFunction>(n));
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                if (arrays[i][k].size() != box.size())
                    throw std::runtime_error("metric json: component array size mismatch");
                GridFunction f(box);
                f.values = arrays[i][k];
                comp[i][k] = std::move(f);
            }
        ChartMetric m =
            ChartMetric::gridded(box, std::move(comp), jm.value("max_derivative_order", 4));
        m.validate();
        return m;
    }
    throw std::runtime_error("metric json: unknown metric type '" + type + "'");
}

} // namespace heatforms
