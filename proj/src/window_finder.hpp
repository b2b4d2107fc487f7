#pragma once

// Window extraction shared by the single-pair path and the batch kernels so
// both produce bit-identical windows from the same coarse samples.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "caas/constellation.hpp"

namespace caas::constellation::detail {

// Coarse local maxima below the mask but within this margin get a peak search.
inline constexpr double kGrazingMarginDeg = 1.0;

inline std::vector<double> coarse_times(Horizon h, double step) {
    std::vector<double> ts;
    const double len = h.length();
    if (len <= 0.0) return ts;
    const auto n = static_cast<long>(std::ceil(len / step - 1e-9));
    ts.reserve(static_cast<std::size_t>(n) + 1);
    for (long k = 0; k < n; ++k) ts.push_back(h.start_s + static_cast<double>(k) * step);
    ts.push_back(h.end_s);
    return ts;
}

// Returns the bracket end on the covered side after shrinking [lo, hi] to tol.
template <typename Margin>
double bisect_crossing(Margin&& margin, double lo, double hi, bool rising, double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const bool above = margin(mid) >= 0.0;
        if (above == rising)
            hi = mid;
        else
            lo = mid;
    }
    return rising ? hi : lo;
}

template <typename Margin>
double golden_max(Margin&& margin, double lo, double hi, double tol, double* arg_out) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = margin(c), fd = margin(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = margin(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = margin(d);
        }
    }
    const double arg = fc > fd ? c : d;
    if (arg_out) *arg_out = arg;
    return fc > fd ? fc : fd;
}

// elev(t) returns the elevation in degrees; samples[k] = elev(times[k]).
template <typename Elev>
std::vector<CoverageWindow> find_windows(Elev&& elev, std::span<const double> times,
                                         std::span<const double> samples, Horizon h,
                                         double mask_deg, SatelliteId sat, int gp_id) {
    std::vector<CoverageWindow> out;
    const std::size_t n = times.size();
    if (n < 2) return out;
    auto margin = [&](double t) { return elev(t) - mask_deg; };
    const double tol = kEndpointToleranceS;

    auto peak_between = [&](double lo, double hi, double* t_peak) {
        return golden_max(margin, lo, hi, tol, t_peak) + mask_deg;
    };

    auto close_window = [&](double start, double end, std::size_t k_lo, std::size_t k_hi) {
        // Peak refined around the best coarse sample inside [k_lo, k_hi].
        std::size_t best = k_lo;
        for (std::size_t k = k_lo; k <= k_hi && k < n; ++k)
            if (samples[k] > samples[best]) best = k;
        double lo = std::max(start, best > 0 ? times[best - 1] : times[0]);
        double hi = std::min(end, best + 1 < n ? times[best + 1] : times[n - 1]);
        double peak = samples[best];
        if (hi > lo) peak = std::max(peak, peak_between(lo, hi, nullptr));
        if (end > start) out.push_back({sat, gp_id, start, end, peak});
    };

    bool above = samples[0] >= mask_deg;
    double start = h.start_s;
    std::size_t k_start = 0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const bool next_above = samples[k + 1] >= mask_deg;
        if (!above && !next_above) {
            // A pass may peak above the mask between two coarse samples that are both below it.
            const bool local_max = samples[k] >= (k > 0 ? samples[k - 1] : -1e300) &&
                                   samples[k] >= samples[k + 1];
            if (local_max && samples[k] > mask_deg - kGrazingMarginDeg) {
                const double lo = k > 0 ? times[k - 1] : times[k];
                const double hi = times[k + 1];
                double t_peak = lo;
                const double peak = peak_between(lo, hi, &t_peak);
                if (peak >= mask_deg) {
                    const double s = bisect_crossing(margin, lo, t_peak, true, tol);
                    const double e = bisect_crossing(margin, t_peak, hi, false, tol);
                    if (e > s) out.push_back({sat, gp_id, s, e, peak});
                }
            }
        } else if (!above && next_above) {
            start = bisect_crossing(margin, times[k], times[k + 1], true, tol);
            k_start = k + 1;
        } else if (above && !next_above) {
            const double end = bisect_crossing(margin, times[k], times[k + 1], false, tol);
            close_window(start, end, k_start, k);
        }
        above = next_above;
    }
    if (above) close_window(start, h.end_s, k_start, n - 1);
    // Same-window duplicates cannot arise, but grazing windows may be out of order.
    std::sort(out.begin(), out.end(),
              [](const CoverageWindow& a, const CoverageWindow& b) { return a.start_s < b.start_s; });
    return out;
}

}  // namespace caas::constellation::detail
