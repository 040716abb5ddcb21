#include <carnot/grid.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace carnot {

GridGeometry::GridGeometry(Box box, std::vector<int> shape) : box_(std::move(box)), shape_(std::move(shape)) {
    if (shape_.empty() || static_cast<int>(shape_.size()) != box_.dim())
        throw DimensionMismatch("grid shape and box dimension differ");
    if (static_cast<int>(shape_.size()) > kMaxDim) throw InvalidParameter("grid dimension too large");
    for (int a = 0; a < dim(); ++a) {
        if (shape_[static_cast<std::size_t>(a)] < 3) throw InvalidParameter("grid needs at least 3 nodes per axis");
        if (!(box_.hi[a] > box_.lo[a])) throw InvalidParameter("grid box must have positive extent");
        spacing_.push_back((box_.hi[a] - box_.lo[a]) / (shape_[static_cast<std::size_t>(a)] - 1));
    }
    strides_.assign(shape_.size(), 1);
    for (int a = dim() - 2; a >= 0; --a)
        strides_[static_cast<std::size_t>(a)] =
            strides_[static_cast<std::size_t>(a + 1)] * static_cast<std::size_t>(shape_[static_cast<std::size_t>(a + 1)]);
    size_ = strides_[0] * static_cast<std::size_t>(shape_[0]);
}

GridGeometry GridGeometry::cube(int dim, double half_width, int nodes_per_axis) {
    return {Box::cube(dim, half_width), std::vector<int>(static_cast<std::size_t>(dim), nodes_per_axis)};
}

std::vector<int> GridGeometry::multi_index(std::size_t flat) const {
    std::vector<int> idx(shape_.size());
    for (int a = 0; a < dim(); ++a) idx[static_cast<std::size_t>(a)] = axis_index(flat, a);
    return idx;
}

std::size_t GridGeometry::flat_index(const std::vector<int>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim(); ++a)
        flat += strides_[static_cast<std::size_t>(a)] * static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
    return flat;
}

Point GridGeometry::node(std::size_t flat) const {
    Point p(dim());
    for (int a = 0; a < dim(); ++a) p[a] = coordinate(a, axis_index(flat, a));
    return p;
}

bool GridGeometry::is_boundary(std::size_t flat) const {
    for (int a = 0; a < dim(); ++a) {
        const int i = axis_index(flat, a);
        if (i == 0 || i == shape_[static_cast<std::size_t>(a)] - 1) return true;
    }
    return false;
}

std::vector<std::uint8_t> GridGeometry::boundary_mask() const {
    std::vector<std::uint8_t> m(size_);
    for (std::size_t i = 0; i < size_; ++i) m[i] = is_boundary(i) ? 1 : 0;
    return m;
}

bool GridGeometry::operator==(const GridGeometry& o) const {
    return shape_ == o.shape_ && box_.lo == o.box_.lo && box_.hi == o.box_.hi;
}

GridFunction::GridFunction(GridGeometry geom, double fill)
    : geom_(std::move(geom)), values_(geom_.size(), fill), boundary_(geom_.boundary_mask()) {}

GridFunction::GridFunction(GridGeometry geom, std::vector<double> values)
    : geom_(std::move(geom)), values_(std::move(values)), boundary_(geom_.boundary_mask()) {
    if (values_.size() != geom_.size()) throw DimensionMismatch("value count does not match the grid");
}

GridFunction GridFunction::sample(const GridGeometry& geom, const ScalarField& f) {
    GridFunction g(geom);
    for (std::size_t i = 0; i < geom.size(); ++i) g.values_[i] = f(geom.node(i));
    return g;
}

double GridFunction::interpolate(const Point& x) const {
    const int d = geom_.dim();
    if (x.size() != d) throw DimensionMismatch("interpolate: point has the wrong dimension");
    if (!geom_.box().contains(x, 1e-12)) throw DomainExit("interpolation point outside the grid box");
    int base[kMaxDim];
    double frac[kMaxDim];
    for (int a = 0; a < d; ++a) {
        const int n = geom_.shape()[static_cast<std::size_t>(a)];
        const double s = std::clamp((x[a] - geom_.box().lo[a]) / geom_.spacing(a), 0.0, n - 1.0);
        int i = static_cast<int>(std::floor(s));
        if (i >= n - 1) i = n - 2;
        base[a] = i;
        frac[a] = s - i;
    }
    double total = 0.0;
    for (unsigned corner = 0; corner < (1u << d); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int a = 0; a < d; ++a) {
            const bool up = (corner >> a) & 1u;
            w *= up ? frac[a] : 1.0 - frac[a];
            flat += geom_.stride(a) * static_cast<std::size_t>(base[a] + (up ? 1 : 0));
        }
        if (w != 0.0) total += w * values_[flat];
    }
    return total;
}

double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }
double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool GridFunction::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
    if (!(a.geometry() == b.geometry())) throw DimensionMismatch("grids differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void write_text(std::ostream& os, const GridFunction& g) {
    const auto& geo = g.geometry();
    os << "carnot-grid 1\n" << "dim " << geo.dim() << "\nshape";
    for (int s : geo.shape()) os << ' ' << s;
    os << std::setprecision(17) << "\nlo";
    for (int a = 0; a < geo.dim(); ++a) os << ' ' << geo.box().lo[a];
    os << "\nhi";
    for (int a = 0; a < geo.dim(); ++a) os << ' ' << geo.box().hi[a];
    os << "\nvalues\n";
    for (double v : g.values()) os << v << '\n';
}

namespace {

void expect_word(std::istream& is, const char* word) {
    std::string w;
    if (!(is >> w) || w != word) throw ConfigError(std::string("grid text: expected '") + word + "'");
}

}  // namespace

GridFunction read_text(std::istream& is) {
    expect_word(is, "carnot-grid");
    int version = 0;
    is >> version;
    if (version != 1) throw ConfigError("grid text: unsupported version");
    expect_word(is, "dim");
    int d = 0;
    if (!(is >> d) || d < 1 || d > kMaxDim) throw ConfigError("grid text: bad dim");
    std::vector<int> shape(static_cast<std::size_t>(d));
    expect_word(is, "shape");
    for (auto& s : shape) is >> s;
    Box box{Eigen::VectorXd(d), Eigen::VectorXd(d)};
    expect_word(is, "lo");
    for (int a = 0; a < d; ++a) is >> box.lo[a];
    expect_word(is, "hi");
    for (int a = 0; a < d; ++a) is >> box.hi[a];
    expect_word(is, "values");
    if (!is) throw ConfigError("grid text: malformed header");
    GridGeometry geom(box, shape);
    std::vector<double> values(geom.size());
    for (auto& v : values) {
        std::string tok;
        if (!(is >> tok)) throw ConfigError("grid text: too few values");
        v = std::strtod(tok.c_str(), nullptr);
        if (!std::isfinite(v)) throw ConfigError("grid text: non-finite value '" + tok + "'");
    }
    return {geom, std::move(values)};
}

namespace {

template <class T>
void put_le(std::ostream& os, T v) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    unsigned char bytes[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ConfigError("grid binary: truncated input");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
}

}  // namespace

void write_binary(std::ostream& os, const GridFunction& g) {
    const auto& geo = g.geometry();
    os.write("CGRD", 4);
    put_le<std::uint32_t>(os, 1);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(geo.dim()));
    for (int s : geo.shape()) put_le<std::uint64_t>(os, static_cast<std::uint64_t>(s));
    for (int a = 0; a < geo.dim(); ++a) put_le<double>(os, geo.box().lo[a]);
    for (int a = 0; a < geo.dim(); ++a) put_le<double>(os, geo.box().hi[a]);
    for (double v : g.values()) put_le<double>(os, v);
}

GridFunction read_binary(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "CGRD", 4) != 0) throw ConfigError("grid binary: bad magic");
    if (get_le<std::uint32_t>(is) != 1) throw ConfigError("grid binary: unsupported version");
    const auto d = static_cast<int>(get_le<std::uint32_t>(is));
    if (d < 1 || d > kMaxDim) throw ConfigError("grid binary: bad dim");
    std::vector<int> shape(static_cast<std::size_t>(d));
    for (auto& s : shape) s = static_cast<int>(get_le<std::uint64_t>(is));
    Box box{Eigen::VectorXd(d), Eigen::VectorXd(d)};
    for (int a = 0; a < d; ++a) box.lo[a] = get_le<double>(is);
    for (int a = 0; a < d; ++a) box.hi[a] = get_le<double>(is);
    GridGeometry geom(box, shape);
    std::vector<double> values(geom.size());
    for (auto& v : values) {
        v = get_le<double>(is);
        if (!std::isfinite(v)) throw ConfigError("grid binary: non-finite value");
    }
    return {geom, std::move(values)};
}

void save(const std::string& path, const GridFunction& g, bool binary) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    if (binary) write_binary(os, g);
    else write_text(os, g);
}

GridFunction load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open '" + path + "'");
    char magic[4] = {};
    is.read(magic, 4);
    is.clear();
    is.seekg(0);
    if (std::memcmp(magic, "CGRD", 4) == 0) return read_binary(is);
    return read_text(is);
}

}  // namespace carnot
