#pragma once

#include <carnot/scalar_field.hpp>

#include <array>
#include <cmath>
#include <string>

namespace testfields {

using carnot::JetScalar;
using carnot::Point;

/// Builds a ScalarField from a formula generic in the scalar type.
template <class F>
carnot::ScalarField make_field(std::string name, F f) {
    carnot::ScalarField out;
    out.name = std::move(name);
    out.value = [f](const Point& x) {
        std::array<double, carnot::kMaxDim> v{};
        for (int k = 0; k < x.size(); ++k) v[static_cast<std::size_t>(k)] = x[k];
        return f(v.data());
    };
    out.jet = [f](const Point& x) {
        const int n = static_cast<int>(x.size());
        std::array<JetScalar, carnot::kMaxDim> v;
        for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = JetScalar::variable(n, k, x[k]);
        return f(v.data()).to_jet(n);
    };
    return out;
}

}  // namespace testfields
