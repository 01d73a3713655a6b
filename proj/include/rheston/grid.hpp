#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rheston {

// Uniform time grid t_k = k * t_max / n_steps, k = 0..n_steps.
struct FracGrid {
    double t_max = 0.0;
    std::size_t n_steps = 0;

    FracGrid() = default;
    FracGrid(double t_max_, std::size_t n_steps_) : t_max(t_max_), n_steps(n_steps_) {
        if (t_max <= 0.0) throw std::invalid_argument("FracGrid: t_max must be positive");
        if (n_steps < 1) throw std::invalid_argument("FracGrid: n_steps must be >= 1");
    }

    double step() const { return t_max / static_cast<double>(n_steps); }
    std::size_t size() const { return n_steps + 1; }
    double node(std::size_t k) const { return static_cast<double>(k) * step(); }

    std::vector<double> nodes() const {
        std::vector<double> t(size());
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = node(k);
        return t;
    }

    bool operator==(const FracGrid& o) const {
        return t_max == o.t_max && n_steps == o.n_steps;
    }
};

}  // namespace rheston
