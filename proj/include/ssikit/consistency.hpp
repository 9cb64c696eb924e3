#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ssikit/linalg.hpp"
#include "ssikit/modal.hpp"

namespace ssikit {

/// Fixed cross-order agreement criteria.
struct ConsistencyCriteria {
    double freq_rel_tol = 0.02;  // relative change in frequency
    double damp_abs_tol = 0.05;  // absolute change in damping ratio
    double mac_min = 0.98;
};

inline void validate(const ConsistencyCriteria& crit) {
    auto in_range = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!in_range(crit.freq_rel_tol) || !in_range(crit.damp_abs_tol) || !in_range(crit.mac_min))
        throw std::invalid_argument("consistency: criteria must lie in (0, 1]");
}

struct PoleRecord {
    Index order = 0;
    double freq_hz = 0.0;
    double zeta = 0.0;
    Vector shape;
    bool freq_stable = false;
    bool damp_stable = false;
    bool shape_stable = false;

    bool fully_consistent() const { return freq_stable && damp_stable && shape_stable; }
};

struct ConsistencyDiagram {
    std::vector<PoleRecord> records;
    std::vector<Index> orders;
    std::vector<std::pair<double, double>> spectrum;  // optional (freq, magnitude) overlay
};

/// Modal assurance criterion |a^T b|^2 / ((a^T a)(b^T b)).
inline double mac(const Vector& shape_a, const Vector& shape_b) {
    if (shape_a.size() != shape_b.size())
        throw std::invalid_argument("mac: shapes have different lengths");
    const double na = shape_a.squaredNorm();
    const double nb = shape_b.squaredNorm();
    if (!(na > 0.0) || !(nb > 0.0)) throw std::invalid_argument("mac: zero-norm shape");
    const double dot = shape_a.dot(shape_b);
    return (dot * dot) / (na * nb);
}

/// Flag each pole of `current` against the nearest-frequency pole of
/// `previous`. Poles outside the frequency gate get all-false flags.
inline std::vector<PoleRecord> classify(const ModalSet& current, const ModalSet& previous,
                                        const ConsistencyCriteria& crit = ConsistencyCriteria{}) {
    validate(crit);
    if (!previous.frequencies.empty() && previous.order >= current.order)
        throw std::invalid_argument("classify: previous order must be below current order");

    std::vector<PoleRecord> out;
    for (std::size_t i = 0; i < current.frequencies.size(); ++i) {
        PoleRecord rec;
        rec.order = current.order;
        rec.freq_hz = current.frequencies[i];
        rec.zeta = current.damping_ratios[i];
        rec.shape = current.mode_shapes.col(static_cast<Index>(i));

        // nearest previous pole by frequency, lower frequency wins ties
        Index match = -1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < previous.frequencies.size(); ++p) {
            double gap = std::abs(previous.frequencies[p] - rec.freq_hz);
            if (gap < best) {
                best = gap;
                match = static_cast<Index>(p);
            }
        }
        if (match >= 0) {
            const double f_prev = previous.frequencies[static_cast<std::size_t>(match)];
            const double f_max = std::max(rec.freq_hz, f_prev);
            if (f_max > 0.0 && best / f_max <= crit.freq_rel_tol) {
                rec.freq_stable = true;
                rec.damp_stable =
                    std::abs(rec.zeta - previous.damping_ratios[static_cast<std::size_t>(match)]) <=
                    crit.damp_abs_tol;
                rec.shape_stable = mac(rec.shape, previous.mode_shapes.col(match)) >= crit.mac_min;
            }
        }
        out.push_back(std::move(rec));
    }
    std::sort(out.begin(), out.end(),
              [](const PoleRecord& a, const PoleRecord& b) { return a.freq_hz < b.freq_hz; });
    return out;
}

/// Classify pairwise up the order sweep. The lowest order contributes
/// unclassified (all-false) poles.
inline ConsistencyDiagram build_diagram(const std::vector<ModalSet>& modal_sets,
                                        const ConsistencyCriteria& crit = ConsistencyCriteria{}) {
    validate(crit);
    for (std::size_t i = 1; i < modal_sets.size(); ++i)
        if (modal_sets[i].order <= modal_sets[i - 1].order)
            throw std::invalid_argument("build_diagram: orders must be strictly increasing");

    ConsistencyDiagram diagram;
    for (std::size_t i = 0; i < modal_sets.size(); ++i) {
        diagram.orders.push_back(modal_sets[i].order);
        std::vector<PoleRecord> recs =
            i == 0 ? classify(modal_sets[i], ModalSet{}, crit)
                   : classify(modal_sets[i], modal_sets[i - 1], crit);
        diagram.records.insert(diagram.records.end(), recs.begin(), recs.end());
    }
    return diagram;
}

}  // namespace ssikit
