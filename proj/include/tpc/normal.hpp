// Copyright 2026 the tpc authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

namespace tpc {

// Deterministic transcendental kernels. The codec rebuilds probability
// tables from decoded data on both sides of the wire, so everything on that
// path avoids libm functions whose rounding differs between implementations.
// All are plain IEEE double expressions in a fixed evaluation order.

// exp(x); relative error within a few ulp over the range used here.
double pinned_exp(double x);

// log(1 + x) for x in (-1, 1].
double pinned_log1p(double x);

// Complementary error function for z >= 0 (power series below z = 2,
// continued fraction above).
double pinned_erfc(double z);

// Standard normal CDF; absolute error below 1e-12, monotone nondecreasing.
double normal_cdf(double x);

// Standard normal density.
double normal_pdf(double x);

}  // namespace tpc
