#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ssikit/record.hpp"
#include "ssikit/rng.hpp"

namespace ssikit {

enum class OutlierKind { RandomDropout, PeriodicBlock, Clipping, ZeroBlock };

/// Description of one corruption pattern. Fields are read according to kind;
/// pinned_value and noise_std are expressed as fractions of the per-channel
/// absolute maximum.
struct OutlierSpec {
    OutlierKind kind = OutlierKind::RandomDropout;
    double rate = 0.001;             // random dropout: per-sample probability
    double pinned_value = -1.5;      // dropout/periodic: level, x channel max
    double noise_std = 0.01;         // dropout/periodic: noise, x channel max
    double block_duration = 0.01;    // periodic: seconds per block
    double period = 0.5;             // periodic: seconds between block starts
    double clip_fraction = 0.8;      // clipping: fraction of channel max
    double start = 3.0;              // zero block: seconds
    double duration = 1.0;           // zero block: seconds
    std::vector<Index> channels;     // empty = all channels
    std::uint64_t seed = 0;
};

inline void validate(const OutlierSpec& spec, const MultiChannelRecord& record) {
    validate(record);
    if (spec.rate < 0.0 || spec.rate > 1.0)
        throw std::invalid_argument("outliers: rate must be in [0, 1]");
    if (!(spec.clip_fraction > 0.0) || spec.clip_fraction > 1.0)
        throw std::invalid_argument("outliers: clip_fraction must be in (0, 1]");
    if (spec.block_duration < 0.0 || spec.period < 0.0 || spec.start < 0.0 ||
        spec.duration < 0.0)
        throw std::invalid_argument("outliers: block/period/start/duration must be >= 0");
    const double length = record.dt * static_cast<double>(record.samples());
    if (spec.kind == OutlierKind::ZeroBlock && spec.start + spec.duration > length + 1e-12)
        throw std::invalid_argument("outliers: zero block extends past the record");
    if (spec.kind == OutlierKind::PeriodicBlock && spec.block_duration > length + 1e-12)
        throw std::invalid_argument("outliers: block duration exceeds the record");
    for (Index c : spec.channels)
        if (c < 0 || c >= record.channels())
            throw std::invalid_argument("outliers: spec references nonexistent channel " +
                                        std::to_string(c));
}

/// Return a corrupted copy of the record plus the mask of modified samples.
/// The input record is untouched; results are deterministic given spec.seed.
inline std::pair<MultiChannelRecord, OutlierMask> inject_outliers(
    const MultiChannelRecord& record, const OutlierSpec& spec) {
    validate(spec, record);
    MultiChannelRecord corrupted = record;
    OutlierMask mask = OutlierMask::Constant(record.channels(), record.samples(), false);

    std::vector<Index> channels = spec.channels;
    if (channels.empty())
        for (Index c = 0; c < record.channels(); ++c) channels.push_back(c);

    Rng rng(spec.seed);
    const Index n = record.samples();

    switch (spec.kind) {
        case OutlierKind::RandomDropout: {
            for (Index c : channels) {
                const double chan_max = record.data.row(c).cwiseAbs().maxCoeff();
                for (Index k = 0; k < n; ++k) {
                    if (rng.uniform() >= spec.rate) continue;
                    double noise = spec.noise_std > 0.0
                                       ? rng.normal() * spec.noise_std * chan_max
                                       : 0.0;
                    corrupted.data(c, k) = spec.pinned_value * chan_max + noise;
                    mask(c, k) = true;
                }
            }
            break;
        }
        case OutlierKind::PeriodicBlock: {
            const Index block_len =
                std::max<Index>(1, static_cast<Index>(std::round(spec.block_duration / record.dt)));
            const Index period_len =
                std::max<Index>(block_len, static_cast<Index>(std::round(spec.period / record.dt)));
            for (Index c : channels) {
                const double chan_max = record.data.row(c).cwiseAbs().maxCoeff();
                for (Index start = 0; start < n; start += period_len) {
                    for (Index k = start; k < std::min(start + block_len, n); ++k) {
                        double noise = spec.noise_std > 0.0
                                           ? rng.normal() * spec.noise_std * chan_max
                                           : 0.0;
                        corrupted.data(c, k) = spec.pinned_value * chan_max + noise;
                        mask(c, k) = true;
                    }
                }
            }
            break;
        }
        case OutlierKind::Clipping: {
            for (Index c : channels) {
                const double limit = spec.clip_fraction * record.data.row(c).cwiseAbs().maxCoeff();
                for (Index k = 0; k < n; ++k) {
                    double v = record.data(c, k);
                    if (std::abs(v) > limit) {
                        corrupted.data(c, k) = v > 0.0 ? limit : -limit;
                        mask(c, k) = true;
                    }
                }
            }
            break;
        }
        case OutlierKind::ZeroBlock: {
            const Index first = static_cast<Index>(std::round(spec.start / record.dt));
            const Index count = static_cast<Index>(std::round(spec.duration / record.dt));
            for (Index c : channels) {
                for (Index k = first; k < std::min(first + count, n); ++k) {
                    corrupted.data(c, k) = 0.0;
                    mask(c, k) = true;
                }
            }
            break;
        }
    }
    return {std::move(corrupted), std::move(mask)};
}

}  // namespace ssikit
