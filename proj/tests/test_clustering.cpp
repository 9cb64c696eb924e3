#include <catch2/catch.hpp>

#include <functional>
#include <map>
#include <set>

#include "helpers.hpp"
#include "ssikit/clustering.hpp"
#include "ssikit/rng.hpp"

using namespace ssikit;
using namespace ssikit::testing;

namespace {

PoleRecord make_pole(double freq, double zeta, const Vector& shape, Index order = 2) {
    PoleRecord p;
    p.order = order;
    p.freq_hz = freq;
    p.zeta = zeta;
    p.shape = shape;
    return p;
}

/// Reference DBSCAN: recursive expansion with per-query distance evaluation,
/// kept structurally separate from the library implementation.
std::vector<int> reference_dbscan(const std::vector<PoleRecord>& poles, double eps,
                                  Index min_pts) {
    const Index n = static_cast<Index>(poles.size());
    std::vector<int> label(static_cast<std::size_t>(n), -2);
    auto region = [&](Index p) {
        std::vector<Index> out;
        for (Index q = 0; q < n; ++q)
            if (pole_distance(poles[static_cast<std::size_t>(p)],
                              poles[static_cast<std::size_t>(q)]) <= eps)
                out.push_back(q);
        return out;
    };
    std::function<void(Index, int)> grow = [&](Index p, int cluster) {
        std::vector<Index> nbrs = region(p);
        if (static_cast<Index>(nbrs.size()) < min_pts) return;  // not core
        for (Index q : nbrs) {
            int& lq = label[static_cast<std::size_t>(q)];
            if (lq == -1) lq = cluster;
            if (lq != -2) continue;
            lq = cluster;
            grow(q, cluster);
        }
    };
    int next = 0;
    for (Index p = 0; p < n; ++p) {
        if (label[static_cast<std::size_t>(p)] != -2) continue;
        if (static_cast<Index>(region(p).size()) < min_pts) {
            label[static_cast<std::size_t>(p)] = -1;
            continue;
        }
        label[static_cast<std::size_t>(p)] = next;
        grow(p, next);
        ++next;
    }
    return label;
}

std::vector<int> labels_of(const std::vector<PoleCluster>& clusters, std::size_t n) {
    std::vector<int> label(n, -1);
    for (const PoleCluster& c : clusters)
        for (Index m : c.members) label[static_cast<std::size_t>(m)] = c.label;
    return label;
}

/// Partition equality up to label renumbering.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> fwd, bwd;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] == -1) != (b[i] == -1)) return false;
        if (a[i] == -1) continue;
        auto [it_f, new_f] = fwd.emplace(a[i], b[i]);
        if (!new_f && it_f->second != b[i]) return false;
        auto [it_b, new_b] = bwd.emplace(b[i], a[i]);
        if (!new_b && it_b->second != a[i]) return false;
    }
    return true;
}

std::vector<PoleRecord> random_poles(Rng& rng, Index count) {
    std::vector<PoleRecord> poles;
    // three loose frequency groups plus scatter
    for (Index i = 0; i < count; ++i) {
        double base = (i % 3 == 0) ? 5.0 : (i % 3 == 1) ? 11.0 : 23.0;
        double freq = base * (1.0 + 0.01 * rng.normal());
        Vector shape = rng.normal_vector(3, 0.2);
        shape(i % 3) += 1.0;
        poles.push_back(make_pole(freq, 0.01, shape));
    }
    return poles;
}

}  // namespace

TEST_CASE("pole distance basics", "[distance]") {
    Vector e1 = Vector::Unit(3, 0), e2 = Vector::Unit(3, 1);
    PoleRecord a = make_pole(10.0, 0.01, e1);
    CHECK(pole_distance(a, a) == 0.0);

    PoleRecord b = make_pole(10.0, 0.01, e2);
    CHECK(pole_distance(a, b) == Approx(1.0));  // orthogonal shapes, equal freq

    PoleRecord c = make_pole(11.0, 0.01, e1);
    CHECK(pole_distance(a, c) == Approx(1.0 / 11.0).epsilon(1e-12));

    PoleRecord zero = make_pole(0.0, 0.0, e1);
    CHECK_THROWS_WITH(pole_distance(zero, zero), Catch::Matchers::Contains("zero"));
}

TEST_CASE("pole distance is symmetric with identity of indiscernibles", "[distance]") {
    Rng rng(90);
    for (int t = 0; t < 100; ++t) {
        PoleRecord a = make_pole(1.0 + rng.uniform() * 20.0, 0.01, rng.normal_vector(3));
        PoleRecord b = make_pole(1.0 + rng.uniform() * 20.0, 0.01, rng.normal_vector(3));
        double d_ab = pole_distance(a, b);
        REQUIRE(d_ab >= 0.0);
        REQUIRE(pole_distance(b, a) == Approx(d_ab).epsilon(1e-12));
    }
    // zero distance needs equal frequency and MAC one; a scaled shape keeps both
    PoleRecord p = make_pole(7.0, 0.01, Vector::Unit(3, 1));
    PoleRecord q = make_pole(7.0, 0.05, Vector(-4.0 * Vector::Unit(3, 1)));
    CHECK(pole_distance(p, q) < 1e-15);
}

TEST_CASE("identical poles form a single cluster once dense enough", "[dbscan]") {
    Vector shape = Vector::Unit(3, 0);
    std::vector<PoleRecord> poles(30, make_pole(5.0, 0.01, shape));
    ClusteringConfig cfg;
    cfg.eps = 1e-6;
    cfg.min_pts = 25;
    std::vector<PoleCluster> clusters = dbscan(poles, cfg);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].members.size() == 30);
    CHECK(clusters[0].center_freq_hz == Approx(5.0));
}

TEST_CASE("fewer poles than min_pts is all noise", "[dbscan]") {
    Vector shape = Vector::Unit(3, 0);
    std::vector<PoleRecord> poles(10, make_pole(5.0, 0.01, shape));
    ClusteringConfig cfg;
    cfg.eps = 1e-3;
    cfg.min_pts = 25;
    CHECK(dbscan(poles, cfg).empty());
}

TEST_CASE("dbscan matches the recursive reference on random pole sets", "[dbscan]") {
    ClusteringConfig cfg;
    cfg.eps = 0.08;
    cfg.min_pts = 3;
    for (std::uint64_t seed : {1, 2, 3, 4, 5, 6, 7, 8}) {
        Rng rng(700 + seed);
        std::vector<PoleRecord> poles = random_poles(rng, 40);
        std::vector<int> ours = labels_of(dbscan(poles, cfg), poles.size());
        std::vector<int> reference = reference_dbscan(poles, cfg.eps, cfg.min_pts);
        REQUIRE(same_partition(ours, reference));
    }
}

TEST_CASE("dbscan partition survives permutations up to relabeling", "[dbscan]") {
    Rng rng(91);
    std::vector<PoleRecord> poles = random_poles(rng, 40);
    ClusteringConfig cfg;
    cfg.eps = 0.08;
    cfg.min_pts = 3;
    std::vector<int> base = labels_of(dbscan(poles, cfg), poles.size());

    std::vector<Index> perm(poles.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Index>(i);
    for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.raw() % i)]);
    std::vector<PoleRecord> shuffled;
    for (std::size_t i = 0; i < perm.size(); ++i)
        shuffled.push_back(poles[static_cast<std::size_t>(perm[i])]);

    std::vector<int> mapped = labels_of(dbscan(shuffled, cfg), poles.size());
    std::vector<int> unmapped(poles.size());
    for (std::size_t i = 0; i < perm.size(); ++i)
        unmapped[static_cast<std::size_t>(perm[i])] = mapped[i];
    CHECK(same_partition(base, unmapped));
}

TEST_CASE("every member lies within eps of a core point of its cluster", "[dbscan]") {
    Rng rng(92);
    std::vector<PoleRecord> poles = random_poles(rng, 60);
    ClusteringConfig cfg;
    cfg.eps = 0.08;
    cfg.min_pts = 4;
    std::vector<PoleCluster> clusters = dbscan(poles, cfg);
    REQUIRE_FALSE(clusters.empty());
    for (const PoleCluster& cluster : clusters) {
        REQUIRE(static_cast<Index>(cluster.members.size()) >= cfg.min_pts);
        // core points of this cluster
        std::vector<Index> cores;
        for (Index m : cluster.members) {
            Index nbrs = 0;
            for (const PoleRecord& other : poles)
                if (pole_distance(poles[static_cast<std::size_t>(m)], other) <= cfg.eps) ++nbrs;
            if (nbrs >= cfg.min_pts) cores.push_back(m);
        }
        REQUIRE_FALSE(cores.empty());
        for (Index m : cluster.members) {
            double best = 1e300;
            for (Index core : cores)
                best = std::min(best, pole_distance(poles[static_cast<std::size_t>(m)],
                                                    poles[static_cast<std::size_t>(core)]));
            REQUIRE(best <= cfg.eps);
        }
    }
}

TEST_CASE("cluster centers use medians and sign-aligned shapes", "[dbscan]") {
    Vector shape(3);
    shape << 1.0, 0.5, 0.0;
    std::vector<PoleRecord> poles;
    poles.push_back(make_pole(5.00, 0.010, shape));
    poles.push_back(make_pole(5.02, 0.012, Vector(-shape)));  // flipped sign
    poles.push_back(make_pole(5.04, 0.020, shape));
    ClusteringConfig cfg;
    cfg.eps = 0.1;
    cfg.min_pts = 3;
    std::vector<PoleCluster> clusters = dbscan(poles, cfg);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].center_freq_hz == Approx(5.02));
    CHECK(clusters[0].center_zeta == Approx(0.012));
    // sign alignment keeps the mean shape from cancelling
    CHECK(mac(clusters[0].center_shape, shape) == Approx(1.0).margin(1e-12));
}

TEST_CASE("temporal trend of identical datasets repeats its rows", "[trend]") {
    Rng rng(93);
    Matrix shapes(3, 2);
    shapes << 1, 0, 0, 1, 0.2, 0.3;
    std::vector<ModalSet> sweep;
    for (Index order = 2; order <= 10; order += 2) {
        ModalSet s;
        s.order = order;
        s.frequencies = {4.0, 9.0};
        s.damping_ratios = {0.01, 0.02};
        s.mode_shapes = shapes;
        s.spurious = {false, false};
        sweep.push_back(s);
    }
    ClusteringConfig cfg;
    cfg.eps = 0.02;
    cfg.min_pts = 3;
    std::vector<TrendRow> rows = temporal_trend({{0.0, sweep}, {1.0, sweep}}, cfg);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].center_frequencies.size() == 2);
    CHECK(rows[0].center_frequencies == rows[1].center_frequencies);
}

TEST_CASE("a frequency ramp across datasets yields a monotone trajectory", "[trend]") {
    Matrix shape = Matrix::Ones(3, 1);
    std::vector<std::pair<double, std::vector<ModalSet>>> datasets;
    for (int day = 0; day < 5; ++day) {
        double f = 6.0 * (1.0 + 0.01 * day);
        std::vector<ModalSet> sweep;
        for (Index order = 2; order <= 10; order += 2) {
            ModalSet s;
            s.order = order;
            s.frequencies = {f};
            s.damping_ratios = {0.01};
            s.mode_shapes = shape;
            s.spurious = {false};
            sweep.push_back(s);
        }
        datasets.emplace_back(static_cast<double>(day), sweep);
    }
    ClusteringConfig cfg;
    cfg.eps = 0.02;
    cfg.min_pts = 3;
    std::vector<TrendRow> rows = temporal_trend(datasets, cfg);
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].center_frequencies.size() == 1);
        REQUIRE(rows[i].center_frequencies[0] > rows[i - 1].center_frequencies[0]);
    }
}

TEST_CASE("empty sweeps are rejected, empty cluster rows are not", "[trend]") {
    CHECK_THROWS_AS(temporal_trend({{0.0, {}}}, ClusteringConfig{}), std::invalid_argument);

    // one dataset whose poles never reach min_pts density: row kept, no centers
    Matrix shape = Matrix::Ones(2, 1);
    ModalSet lone;
    lone.order = 2;
    lone.frequencies = {4.0};
    lone.damping_ratios = {0.01};
    lone.mode_shapes = shape;
    lone.spurious = {false};
    ClusteringConfig cfg;
    cfg.eps = 0.01;
    cfg.min_pts = 5;
    std::vector<TrendRow> rows = temporal_trend({{0.0, {lone}}}, cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].center_frequencies.empty());
}
