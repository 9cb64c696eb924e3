#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ssikit/linalg.hpp"
#include "ssikit/record.hpp"

namespace ssikit {

/// In-place iterative radix-2 FFT. Length must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_radix2: length must be a power of two");
    // bit reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = x[i + k];
                std::complex<double> v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

struct PowerSpectrum {
    Vector frequencies;  // Hz, one-sided
    Vector power;        // PSD estimate
};

/// Welch PSD with a Hann window and 50% segment overlap.
inline PowerSpectrum welch_psd(const Vector& signal, double sample_rate, Index nperseg = 2048) {
    if (!(sample_rate > 0.0)) throw std::invalid_argument("welch_psd: sample_rate must be > 0");
    if (nperseg < 4 || (nperseg & (nperseg - 1)) != 0)
        throw std::invalid_argument("welch_psd: nperseg must be a power of two >= 4");
    if (signal.size() < nperseg)
        throw std::invalid_argument("welch_psd: signal shorter than one segment");

    Vector window(nperseg);
    for (Index i = 0; i < nperseg; ++i)
        window(i) = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / static_cast<double>(nperseg)));
    const double win_power = window.squaredNorm();

    const Index step = nperseg / 2;
    const Index nbins = nperseg / 2 + 1;
    Vector acc = Vector::Zero(nbins);
    Index nseg = 0;
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(nperseg));
    for (Index start = 0; start + nperseg <= signal.size(); start += step, ++nseg) {
        Vector seg = signal.segment(start, nperseg);
        seg.array() -= seg.mean();
        for (Index i = 0; i < nperseg; ++i) buf[static_cast<std::size_t>(i)] = seg(i) * window(i);
        fft_radix2(buf);
        for (Index b = 0; b < nbins; ++b)
            acc(b) += std::norm(buf[static_cast<std::size_t>(b)]);
    }
    acc /= static_cast<double>(nseg) * win_power * sample_rate;
    // one-sided scaling, DC and Nyquist bins are not doubled
    for (Index b = 1; b + 1 < nbins; ++b) acc(b) *= 2.0;

    PowerSpectrum out;
    out.power = acc;
    out.frequencies.resize(nbins);
    for (Index b = 0; b < nbins; ++b)
        out.frequencies(b) = sample_rate * static_cast<double>(b) / static_cast<double>(nperseg);
    return out;
}

/// Channel-averaged Welch PSD of a record.
inline PowerSpectrum welch_psd(const MultiChannelRecord& record, Index nperseg = 2048) {
    PowerSpectrum avg;
    for (Index c = 0; c < record.channels(); ++c) {
        PowerSpectrum s = welch_psd(Vector(record.data.row(c)), 1.0 / record.dt, nperseg);
        if (c == 0) {
            avg = s;
        } else {
            avg.power += s.power;
        }
    }
    avg.power /= static_cast<double>(record.channels());
    return avg;
}

/// Local maxima of the PSD, refined by parabolic interpolation on a log
/// scale, strongest first. min_prominence is relative to the largest peak.
inline std::vector<double> spectral_peaks(const PowerSpectrum& spectrum, Index max_peaks,
                                          double min_prominence = 1e-4) {
    struct Peak {
        double freq;
        double power;
    };
    std::vector<Peak> peaks;
    const Vector& p = spectrum.power;
    for (Index b = 1; b + 1 < p.size(); ++b) {
        if (!(p(b) > p(b - 1) && p(b) >= p(b + 1))) continue;
        double la = std::log(std::max(p(b - 1), 1e-300));
        double lb = std::log(std::max(p(b), 1e-300));
        double lc = std::log(std::max(p(b + 1), 1e-300));
        double denom = la - 2.0 * lb + lc;
        double shift = denom != 0.0 ? 0.5 * (la - lc) / denom : 0.0;
        shift = std::clamp(shift, -0.5, 0.5);
        double df = spectrum.frequencies(1) - spectrum.frequencies(0);
        peaks.push_back({spectrum.frequencies(b) + shift * df, p(b)});
    }
    std::sort(peaks.begin(), peaks.end(),
              [](const Peak& a, const Peak& b) { return a.power > b.power; });
    std::vector<double> out;
    for (const Peak& pk : peaks) {
        if (static_cast<Index>(out.size()) >= max_peaks) break;
        if (!peaks.empty() && pk.power < min_prominence * peaks.front().power) break;
        out.push_back(pk.freq);
    }
    return out;
}

}  // namespace ssikit
