// Copyright 2026 dextra Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Fits synthetic expectation-value-vs-distance data and compares the
// exponential ansatz against Richardson extrapolation.

#include <cstdio>

#include "dextra/fit.hpp"
#include "dextra/rng.hpp"

int main() {
    using namespace dextra;
    const double true_a = 0.85;
    Xoshiro256 rng(7, 0);

    DataSeries series;
    series.cutoff_d = 13;
    for (int d : {3, 5, 7, 9, 11, 13}) {
        double y = true_a + 0.2 * std::exp(-0.45 * d) - 0.05 * std::exp(-0.9 * d);
        uint64_t n = 10000000;
        double q = (1.0 - y) / 2.0;
        double qhat = (n * q + std::sqrt(n * q * (1.0 - q)) * rng.normal()) / n;
        series.points.push_back({d, 1.0 - 2.0 * qhat, 2.0 * std::sqrt(qhat * (1.0 - qhat) / n), n});
    }

    FitResult fit = lm_fit(series, Ansatz::double_exp);
    double rich = richardson_extrapolate(series);
    auto samples = bootstrap(series, Ansatz::double_exp, 500, 4);

    std::printf("true value        %.6f\n", true_a);
    std::printf("ansatz fit        %.6f  (R^2 = %.5f)\n", fit.extrapolated, fit.r2);
    std::printf("bootstrap 68%%     [%.6f, %.6f]\n", percentile(samples, 16.0), percentile(samples, 84.0));
    std::printf("richardson        %.6f\n", rich);
    std::printf("ansatz |error|    %.2e\n", std::abs(fit.extrapolated - true_a));
    std::printf("richardson |error| %.2e\n", std::abs(rich - true_a));
    return 0;
}
