#include <catch2/catch.hpp>

#include "helpers.hpp"
#include "ssikit/hankel.hpp"
#include "ssikit/mdof.hpp"
#include "ssikit/rng.hpp"

using namespace ssikit;
using namespace ssikit::testing;

namespace {

MultiChannelRecord make_record(const Matrix& data, double dt = 0.01) {
    MultiChannelRecord rec;
    rec.data = data;
    rec.dt = dt;
    return rec;
}

}  // namespace

TEST_CASE("smallest hankel pair: one channel, N=4, j=1", "[hankel]") {
    Matrix data(1, 4);
    data << 1.0, 2.0, 3.0, 4.0;
    HankelPair h = build_hankel(make_record(data), 1);
    REQUIRE(h.ncols == 3);
    // mean centering removes 2.5
    Vector past_expect(3), future_expect(3);
    past_expect << -1.5, -0.5, 0.5;
    future_expect << -0.5, 0.5, 1.5;
    CHECK((h.past.row(0).transpose() - past_expect).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((h.future.row(0).transpose() - future_expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("hankel block layout indexes channel c at sample t+b", "[hankel]") {
    Rng rng(3);
    Matrix data = rng.normal_matrix(2, 30);
    Matrix centered = data;
    for (Index c = 0; c < 2; ++c) centered.row(c).array() -= centered.row(c).mean();
    HankelPair h = build_hankel(make_record(data), 4);
    REQUIRE(h.ncols == 23);
    for (Index b = 0; b < 4; ++b)
        for (Index c = 0; c < 2; ++c)
            for (Index t = 0; t < h.ncols; ++t) {
                REQUIRE(h.past(b * 2 + c, t) == centered(c, t + b));
                REQUIRE(h.future(b * 2 + c, t) == centered(c, t + b + 4));
            }
}

TEST_CASE("benchmark dimensions: l=3, N=8192, j=10", "[hankel]") {
    SimulationConfig cfg;
    cfg.num_samples = 8192;
    cfg.seed = 1;
    MultiChannelRecord rec = simulate_response(benchmark_3dof(), cfg);
    HankelPair h = build_hankel(rec, 10);
    CHECK(h.past.rows() == 30);
    CHECK(h.future.rows() == 30);
    CHECK(h.ncols == 8173);
}

TEST_CASE("constant channels produce zero hankel blocks", "[hankel]") {
    Matrix data = Matrix::Constant(2, 12, 3.7);
    HankelPair h = build_hankel(make_record(data), 2);
    CHECK(h.past.cwiseAbs().maxCoeff() < 1e-13);
    CHECK(h.future.cwiseAbs().maxCoeff() < 1e-13);
    CovarianceSet cov = covariances(h);
    CHECK(cov.spp.cwiseAbs().maxCoeff() < 1e-26);
    CHECK(cov.sff.cwiseAbs().maxCoeff() < 1e-26);
}

TEST_CASE("record shorter than 2j is rejected", "[hankel]") {
    Matrix data = Matrix::Ones(1, 5);
    CHECK_THROWS_WITH(build_hankel(make_record(data), 3), Catch::Matchers::Contains("2j"));
}

TEST_CASE("covariances match the naive outer-product sum", "[hankel]") {
    Rng rng(8);
    Matrix data = rng.normal_matrix(2, 53);  // j=2 -> ncols=50
    HankelPair h = build_hankel(make_record(data), 2);
    REQUIRE(h.ncols == 50);
    CovarianceSet cov = covariances(h);

    Matrix spp = Matrix::Zero(4, 4), sff = Matrix::Zero(4, 4), sfp = Matrix::Zero(4, 4);
    for (Index t = 0; t < h.ncols; ++t) {
        spp += h.past.col(t) * h.past.col(t).transpose();
        sff += h.future.col(t) * h.future.col(t).transpose();
        sfp += h.future.col(t) * h.past.col(t).transpose();
    }
    spp /= 50.0;
    sff /= 50.0;
    sfp /= 50.0;
    CHECK((cov.spp - spp).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((cov.sff - sff).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((cov.sfp - sfp).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("identical halves collapse the covariance blocks", "[hankel]") {
    Rng rng(9);
    HankelPair h;
    h.l = 2;
    h.j = 2;
    h.ncols = 40;
    h.past = rng.normal_matrix(4, 40);
    h.future = h.past;
    CovarianceSet cov = covariances(h);
    CHECK((cov.sff - cov.spp).cwiseAbs().maxCoeff() == 0.0);
    CHECK((cov.sfp - cov.spp).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("spf is exactly the transpose of sfp", "[hankel]") {
    Rng rng(10);
    Matrix data = rng.normal_matrix(3, 100);
    CovarianceSet cov = covariances(make_record(data), 5);
    CHECK((cov.spf - cov.sfp.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((cov.spp - cov.spp.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((cov.sff - cov.sff.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("channel offsets are removed by mean centering", "[hankel]") {
    Rng rng(11);
    Matrix data = rng.normal_matrix(2, 80);
    CovarianceSet base = covariances(make_record(data), 3);
    Matrix shifted = data;
    shifted.row(0).array() += 100.0;
    shifted.row(1).array() -= 42.0;
    CovarianceSet off = covariances(make_record(shifted), 3);
    CHECK((base.spp - off.spp).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((base.sfp - off.sfp).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("white-noise lag covariances shrink with record length", "[hankel]") {
    auto offdiag_norm = [](Index n_samples, std::uint64_t seed) {
        Rng rng(seed);
        Matrix data = rng.normal_matrix(2, n_samples);
        CovarianceSet cov = covariances(make_record(data), 3);
        // lag-2 block of the past auto covariance, zero in expectation
        return cov.spp.block(4, 0, 2, 2).norm();
    };
    double short_avg = 0.0, long_avg = 0.0;
    for (std::uint64_t s = 0; s < 6; ++s) {
        short_avg += offdiag_norm(2000, 100 + s);
        long_avg += offdiag_norm(32000, 200 + s);
    }
    // 16x the data should shrink the off-diagonal blocks by about 4x
    CHECK(short_avg / long_avg > 2.0);
}
