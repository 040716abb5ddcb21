#include <carnot/group.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace carnot {

GroupSpec::GroupSpec(std::string name, std::vector<int> layer_dims,
                     std::vector<StructureConstant> constants)
    : name_(std::move(name)), layer_dims_(std::move(layer_dims)), supplied_(std::move(constants)) {
    if (layer_dims_.empty()) throw InvalidParameter("group spec needs at least one layer");
    int layer = 1;
    for (int m : layer_dims_) {
        if (m <= 0) throw InvalidParameter("layer dimensions must be positive");
        offsets_.push_back(dim_);
        for (int i = 0; i < m; ++i) layer_of_.push_back(layer);
        dim_ += m;
        hom_dim_ += layer * m;
        step_factorial_ *= layer;
        ++layer;
    }
    if (dim_ > kMaxDim) {
        throw InvalidParameter("total dimension " + std::to_string(dim_) + " exceeds the supported " +
                               std::to_string(kMaxDim));
    }
    dense_.assign(static_cast<std::size_t>(dim_) * dim_ * dim_, 0.0);
    for (const auto& c : supplied_) {
        if (c.k < 0 || c.i < 0 || c.j < 0 || c.k >= dim_ || c.i >= dim_ || c.j >= dim_) {
            throw InvalidParameter("structure constant index out of range");
        }
        dense_[static_cast<std::size_t>((c.k * dim_ + c.i) * dim_ + c.j)] += c.value;
    }
    // Mirrored entries are adjacent so that antisymmetric pairs cancel exactly in x^{-1} * x.
    for (int k = 0; k < dim_; ++k) {
        for (int i = 0; i < dim_; ++i) {
            for (int j = i; j < dim_; ++j) {
                if (const double v = constant(k, i, j); v != 0.0) nonzero_.push_back({k, i, j, v});
                if (j == i) continue;
                if (const double v = constant(k, j, i); v != 0.0) nonzero_.push_back({k, j, i, v});
            }
        }
    }
}

namespace {

constexpr double kAlgebraTol = 1e-12;

std::string fmt_index(int k, int i, int j) {
    std::ostringstream os;
    os << "c[" << k + 1 << "][" << i + 1 << "][" << j + 1 << "]";
    return os.str();
}

}  // namespace

std::vector<Violation> validate_spec(const GroupSpec& spec) {
    std::vector<Violation> out;
    const int n = spec.dim();
    const int r = spec.step();

    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                const double a = spec.constant(k, i, j);
                const double b = spec.constant(k, j, i);
                if (std::abs(a + b) > kAlgebraTol) {
                    out.push_back({"antisymmetry",
                                   fmt_index(k, i, j) + " = " + std::to_string(a) + " but " +
                                       fmt_index(k, j, i) + " = " + std::to_string(b),
                                   {k + 1, i + 1, j + 1}});
                }
            }
        }
    }

    for (const auto& c : spec.brackets()) {
        const int target = spec.layer_of(c.i) + spec.layer_of(c.j);
        if (spec.layer_of(c.k) != target) {
            std::string why = target > r ? "bracket must vanish beyond the step"
                                         : "lands in layer " + std::to_string(spec.layer_of(c.k)) +
                                               ", expected layer " + std::to_string(target);
            out.push_back({"grading", fmt_index(c.k, c.i, c.j) + ": " + why, {c.k + 1, c.i + 1, c.j + 1}});
        }
    }

    // Jacobi on basis triples: [a,[b,c]] + [b,[c,a]] + [c,[a,b]] = 0.
    std::vector<double> ea(n), eb(n), ec(n), t(n), s(n), acc(n);
    auto unit = [](std::vector<double>& v, int idx) {
        std::fill(v.begin(), v.end(), 0.0);
        v[static_cast<std::size_t>(idx)] = 1.0;
    };
    auto cyc = [&](const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& z) {
        bracket_into(spec, y.data(), z.data(), t.data());
        bracket_into(spec, x.data(), t.data(), s.data());
        for (int q = 0; q < n; ++q) acc[q] += s[q];
    };
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            for (int c = b + 1; c < n; ++c) {
                unit(ea, a);
                unit(eb, b);
                unit(ec, c);
                std::fill(acc.begin(), acc.end(), 0.0);
                cyc(ea, eb, ec);
                cyc(eb, ec, ea);
                cyc(ec, ea, eb);
                const double defect = Eigen::Map<Eigen::VectorXd>(acc.data(), n).cwiseAbs().maxCoeff();
                if (defect > kAlgebraTol) {
                    out.push_back({"jacobi",
                                   "Jacobi identity fails on (e" + std::to_string(a + 1) + ", e" +
                                       std::to_string(b + 1) + ", e" + std::to_string(c + 1) +
                                       "), defect " + std::to_string(defect),
                                   {a + 1, b + 1, c + 1}});
                }
            }
        }
    }

    // Layer j+1 must be spanned by [layer 1, layer j].
    const int m1 = spec.generators();
    for (int layer = 1; layer < r; ++layer) {
        const int next = layer + 1;
        const int rows = spec.layer_dims()[static_cast<std::size_t>(next - 1)];
        const int off_next = spec.layer_offset(next);
        const int off_cur = spec.layer_offset(layer);
        const int mj = spec.layer_dims()[static_cast<std::size_t>(layer - 1)];
        Eigen::MatrixXd span(rows, m1 * mj);
        for (int a = 0; a < m1; ++a)
            for (int b = 0; b < mj; ++b)
                for (int q = 0; q < rows; ++q)
                    span(q, a * mj + b) = spec.constant(off_next + q, a, off_cur + b);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(span);
        qr.setThreshold(1e-9);
        if (qr.rank() < rows) {
            out.push_back({"generation",
                           "[layer 1, layer " + std::to_string(layer) + "] spans " +
                               std::to_string(qr.rank()) + " of " + std::to_string(rows) +
                               " directions in layer " + std::to_string(next),
                           {layer, next}});
        }
    }
    return out;
}

GroupSpec abelian(int n) {
    if (n < 1) throw InvalidParameter("abelian group needs n >= 1");
    return GroupSpec("abelian" + std::to_string(n), {n}, {});
}

GroupSpec heisenberg(int n) {
    if (n < 1 || n > 3) throw InvalidParameter("heisenberg(n) is shipped for 1 <= n <= 3");
    std::vector<StructureConstant> c;
    const int t = 2 * n;
    for (int i = 0; i < n; ++i) {
        c.push_back({t, i, n + i, 1.0});
        c.push_back({t, n + i, i, -1.0});
    }
    return GroupSpec(n == 1 ? "heisenberg" : "heisenberg" + std::to_string(n), {2 * n, 1}, std::move(c));
}

GroupSpec engel() {
    return GroupSpec("engel", {2, 1, 1},
                     {{2, 0, 1, 1.0}, {2, 1, 0, -1.0}, {3, 0, 2, 1.0}, {3, 2, 0, -1.0}});
}

GroupSpec free_step2(int generators) {
    if (generators < 2) throw InvalidParameter("free step-2 group needs at least 2 generators");
    const int m = generators;
    std::vector<StructureConstant> c;
    int k = m;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            c.push_back({k, i, j, 1.0});
            c.push_back({k, j, i, -1.0});
            ++k;
        }
    }
    return GroupSpec(m == 2 ? "free_step2" : "free_step2_" + std::to_string(m), {m, m * (m - 1) / 2},
                     std::move(c));
}

GroupSpec builtin_group(const std::string& name) {
    auto suffix_int = [&](std::size_t prefix_len) -> int {
        const std::string rest = name.substr(prefix_len);
        if (rest.empty()) return -1;
        if (!std::all_of(rest.begin(), rest.end(), [](unsigned char ch) { return std::isdigit(ch); }))
            throw UnknownName("unknown group '" + name + "'");
        return std::stoi(rest);
    };
    if (name == "heisenberg" || name == "H1") return heisenberg(1);
    if (name == "engel") return engel();
    if (name == "free_step2") return free_step2(2);
    if (name.rfind("heisenberg", 0) == 0) return heisenberg(suffix_int(10));
    if (name.rfind("free_step2_", 0) == 0) return free_step2(suffix_int(11));
    if (name.rfind("abelian", 0) == 0) {
        const int n = suffix_int(7);
        return abelian(n < 0 ? 2 : n);
    }
    throw UnknownName("unknown group '" + name + "'");
}

std::vector<std::string> builtin_group_names() {
    return {"abelian<n>", "heisenberg", "heisenberg2", "heisenberg3", "engel", "free_step2", "free_step2_<m>"};
}

namespace {

void check_dim(const GroupSpec& spec, const Point& x, const char* what) {
    if (x.size() != spec.dim()) {
        throw DimensionMismatch(std::string(what) + ": expected dimension " + std::to_string(spec.dim()) +
                                ", got " + std::to_string(x.size()));
    }
}

}  // namespace

Point multiply(const GroupSpec& spec, const Point& x, const Point& y) {
    check_dim(spec, x, "multiply");
    check_dim(spec, y, "multiply");
    Point out(spec.dim());
    multiply_into(spec, x.data(), y.data(), out.data());
    return out;
}

Point inverse(const Point& x) { return -x; }

Point identity(const GroupSpec& spec) { return Point::Zero(spec.dim()); }

Point dilate(const GroupSpec& spec, double lambda, const Point& x) {
    if (!(lambda > 0.0)) throw NonPositiveLambda("dilation factor must be positive");
    check_dim(spec, x, "dilate");
    Point out(x.size());
    for (int k = 0; k < spec.dim(); ++k) out[k] = std::pow(lambda, spec.layer_of(k)) * x[k];
    return out;
}

double hom_norm_power(const GroupSpec& spec, const double* x) {
    const int rf = spec.step_factorial();
    double total = 0.0;
    int k = 0;
    const auto& dims = spec.layer_dims();
    for (std::size_t j = 0; j < dims.size(); ++j) {
        double sq = 0.0;
        for (int i = 0; i < dims[j]; ++i, ++k) sq += x[k] * x[k];
        const int e = rf / static_cast<int>(j + 1);
        double p = 1.0;
        for (int q = 0; q < e; ++q) p *= sq;
        total += p;
    }
    return total;
}

double hom_norm(const GroupSpec& spec, const Point& x) {
    check_dim(spec, x, "hom_norm");
    // Rescale by the largest dilation-normalized block to avoid overflow in high powers.
    double scale = 0.0;
    for (int k = 0; k < spec.dim(); ++k)
        scale = std::max(scale, std::pow(std::abs(x[k]), 1.0 / spec.layer_of(k)));
    if (scale == 0.0) return 0.0;
    const Point y = dilate(spec, 1.0 / scale, x);
    return scale * std::pow(hom_norm_power(spec, y.data()), 1.0 / (2.0 * spec.step_factorial()));
}

double metric(const GroupSpec& spec, const Point& x, const Point& y) {
    return hom_norm(spec, multiply(spec, inverse(y), x));
}

Point conjugate(const GroupSpec& spec, const Point& h, const Point& x) {
    return multiply(spec, multiply(spec, inverse(h), x), h);
}

Eigen::VectorXd project_layer(const GroupSpec& spec, const Point& x, int layer) {
    check_dim(spec, x, "project_layer");
    if (layer < 1 || layer > spec.step()) throw InvalidParameter("layer index out of range");
    return x.segment(spec.layer_offset(layer), spec.layer_dims()[static_cast<std::size_t>(layer - 1)]);
}

Point from_layers(const GroupSpec& spec, const std::vector<Eigen::VectorXd>& layers) {
    if (static_cast<int>(layers.size()) != spec.step()) throw DimensionMismatch("wrong number of layers");
    Point out(spec.dim());
    for (int j = 1; j <= spec.step(); ++j) {
        const auto& block = layers[static_cast<std::size_t>(j - 1)];
        if (block.size() != spec.layer_dims()[static_cast<std::size_t>(j - 1)])
            throw DimensionMismatch("layer " + std::to_string(j) + " has the wrong size");
        out.segment(spec.layer_offset(j), block.size()) = block;
    }
    return out;
}

double dilated_box_volume(const GroupSpec& spec, double lambda, double volume) {
    if (!(lambda > 0.0)) throw NonPositiveLambda("dilation factor must be positive");
    double factor = 1.0;
    for (int j = 1; j <= spec.step(); ++j)
        factor *= std::pow(lambda, j * spec.layer_dims()[static_cast<std::size_t>(j - 1)]);
    return factor * volume;
}

std::vector<Point> sample_ball(const GroupSpec& spec, double nu, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> cube(-1.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(out.size()) < count) {
        Point z(spec.dim());
        for (int k = 0; k < spec.dim(); ++k) z[k] = cube(rng);
        const double rho = hom_norm(spec, z);
        if (rho < 1e-12) continue;
        const double target = nu * unit(rng);
        if (target <= 0.0) continue;
        out.push_back(dilate(spec, target / rho, z));
    }
    return out;
}

ConjugationEstimate estimate_conjugation_constant(const GroupSpec& spec, double nu, int samples,
                                                  std::uint64_t seed) {
    if (samples < 1) throw InvalidParameter("samples must be >= 1");
    if (!(nu > 0.0)) throw InvalidParameter("nu must be positive");
    const auto xs = sample_ball(spec, nu, samples, seed);
    const auto ys = sample_ball(spec, nu, samples, seed ^ 0x9e3779b97f4a7c15ULL);
    ConjugationEstimate est;
    est.samples = samples;
    const double inv_r = 1.0 / spec.step();
    for (int s = 0; s < samples; ++s) {
        const Point& x = xs[static_cast<std::size_t>(s)];
        const Point& y = ys[static_cast<std::size_t>(s)];
        const double ny = hom_norm(spec, y);
        const double nx = hom_norm(spec, x);
        const double conj = hom_norm(spec, conjugate(spec, x, y));
        est.conjugation = std::max(est.conjugation, conj / std::pow(ny, inv_r));
        est.pseudo_triangle = std::max(est.pseudo_triangle, hom_norm(spec, multiply(spec, x, y)) / (nx + ny));
    }
    return est;
}

}  // namespace carnot
