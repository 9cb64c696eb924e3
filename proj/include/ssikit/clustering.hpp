#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssikit/consistency.hpp"
#include "ssikit/linalg.hpp"

namespace ssikit {

struct ClusteringConfig {
    double eps = 5e-5;   // reachability distance
    Index min_pts = 25;  // minimum neighbourhood size, self included
    Index max_clusters = 0;  // 0 = unlimited
};

inline void validate(const ClusteringConfig& config) {
    if (!(config.eps > 0.0)) throw std::invalid_argument("clustering: eps must be positive");
    if (config.min_pts < 1) throw std::invalid_argument("clustering: min_pts must be >= 1");
}

struct PoleCluster {
    std::vector<Index> members;
    double center_freq_hz = 0.0;
    double center_zeta = 0.0;
    Vector center_shape;
    int label = -1;
};

/// Pole-to-pole distance: relative frequency separation plus mode-shape
/// disagreement. Symmetric and zero only for equal frequency and MAC = 1;
/// the MAC term breaks the triangle inequality, so this is not a metric.
inline double pole_distance(const PoleRecord& a, const PoleRecord& b) {
    const double f_max = std::max(a.freq_hz, b.freq_hz);
    if (!(f_max > 0.0)) throw std::invalid_argument("pole_distance: zero maximum frequency");
    return std::abs(a.freq_hz - b.freq_hz) / f_max + (1.0 - mac(a.shape, b.shape));
}

namespace detail {

inline PoleCluster make_cluster(const std::vector<PoleRecord>& poles,
                                const std::vector<Index>& members, int label) {
    PoleCluster cluster;
    cluster.members = members;
    cluster.label = label;

    std::vector<double> freqs, zetas;
    for (Index m : members) {
        freqs.push_back(poles[static_cast<std::size_t>(m)].freq_hz);
        zetas.push_back(poles[static_cast<std::size_t>(m)].zeta);
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    cluster.center_freq_hz = median(freqs);
    cluster.center_zeta = median(zetas);

    // sign-aligned mean shape: flip members against the first so the MAC
    // aligned directions average instead of cancelling
    const Vector& ref = poles[static_cast<std::size_t>(members.front())].shape;
    Vector mean = Vector::Zero(ref.size());
    for (Index m : members) {
        Vector s = poles[static_cast<std::size_t>(m)].shape;
        double norm = s.norm();
        if (norm > 0.0) s /= norm;
        if (s.dot(ref) < 0.0) s = -s;
        mean += s;
    }
    mean /= static_cast<double>(members.size());
    cluster.center_shape = mean;
    return cluster;
}

}  // namespace detail

/// Density-based clustering under pole_distance. Core points expand in
/// ascending index order so the result is deterministic; noise points carry
/// label -1 and are not returned.
inline std::vector<PoleCluster> dbscan(const std::vector<PoleRecord>& poles,
                                       const ClusteringConfig& config) {
    validate(config);
    if (poles.empty()) throw std::invalid_argument("dbscan: empty pole list");
    const Index n = static_cast<Index>(poles.size());

    Matrix dist(n, n);
    for (Index i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (Index j = i + 1; j < n; ++j) {
            double d = pole_distance(poles[static_cast<std::size_t>(i)],
                                     poles[static_cast<std::size_t>(j)]);
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }
    auto neighbours = [&](Index i) {
        std::vector<Index> out;
        for (Index j = 0; j < n; ++j)
            if (dist(i, j) <= config.eps) out.push_back(j);
        return out;
    };

    constexpr int kUnvisited = -2;
    constexpr int kNoise = -1;
    std::vector<int> label(static_cast<std::size_t>(n), kUnvisited);
    int next_label = 0;
    for (Index i = 0; i < n; ++i) {
        if (label[static_cast<std::size_t>(i)] != kUnvisited) continue;
        std::vector<Index> nbrs = neighbours(i);
        if (static_cast<Index>(nbrs.size()) < config.min_pts) {
            label[static_cast<std::size_t>(i)] = kNoise;
            continue;
        }
        const int cluster = next_label++;
        label[static_cast<std::size_t>(i)] = cluster;
        std::deque<Index> seeds(nbrs.begin(), nbrs.end());
        while (!seeds.empty()) {
            Index q = seeds.front();
            seeds.pop_front();
            int& lq = label[static_cast<std::size_t>(q)];
            if (lq == kNoise) lq = cluster;  // border point
            if (lq != kUnvisited) continue;
            lq = cluster;
            std::vector<Index> qn = neighbours(q);
            if (static_cast<Index>(qn.size()) >= config.min_pts)
                seeds.insert(seeds.end(), qn.begin(), qn.end());
        }
    }

    std::vector<PoleCluster> clusters;
    for (int c = 0; c < next_label; ++c) {
        if (config.max_clusters > 0 && static_cast<Index>(clusters.size()) >= config.max_clusters)
            break;
        std::vector<Index> members;
        for (Index i = 0; i < n; ++i)
            if (label[static_cast<std::size_t>(i)] == c) members.push_back(i);
        clusters.push_back(detail::make_cluster(poles, members, c));
    }
    return clusters;
}

struct TrendRow {
    double timestamp = 0.0;
    std::vector<double> center_frequencies;  // ascending
};

/// Cluster each dataset's pole sweep and emit the cluster-center frequencies
/// against the dataset timestamp.
inline std::vector<TrendRow> temporal_trend(
    const std::vector<std::pair<double, std::vector<ModalSet>>>& datasets,
    const ClusteringConfig& config, const ConsistencyCriteria& crit = ConsistencyCriteria{}) {
    validate(config);
    std::vector<TrendRow> rows;
    for (const auto& [timestamp, sweep] : datasets) {
        if (sweep.empty()) throw std::invalid_argument("temporal_trend: empty sweep");
        ConsistencyDiagram diagram = build_diagram(sweep, crit);
        TrendRow row;
        row.timestamp = timestamp;
        if (!diagram.records.empty()) {
            std::vector<PoleCluster> clusters = dbscan(diagram.records, config);
            for (const PoleCluster& c : clusters) row.center_frequencies.push_back(c.center_freq_hz);
            std::sort(row.center_frequencies.begin(), row.center_frequencies.end());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace ssikit
