/*
 Copyright 2026 The seir-mpc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Compiled with -mavx2 only (no FMA) so results match the scalar reference.

#include <immintrin.h>

#include "seir_mpc/kernels.hpp"

namespace seir::kernels::detail {

void euler_step_avx2(SoaState x, SoaInput u, double h, double eta) {
    const std::size_t n = x.size();
    const __m256d vh = _mm256_set1_pd(h);
    const __m256d veta = _mm256_set1_pd(eta);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d s = _mm256_loadu_pd(x.s.data() + k);
        const __m256d e = _mm256_loadu_pd(x.e.data() + k);
        const __m256d i = _mm256_loadu_pd(x.i.data() + k);
        const __m256d b = _mm256_loadu_pd(u.beta.data() + k);
        const __m256d g = _mm256_loadu_pd(u.gamma.data() + k);
        const __m256d infection = _mm256_mul_pd(_mm256_mul_pd(b, s), i);
        const __m256d eta_e = _mm256_mul_pd(veta, e);
        const __m256d de = _mm256_sub_pd(infection, eta_e);
        const __m256d di = _mm256_sub_pd(eta_e, _mm256_mul_pd(g, i));
        const __m256d s1 = _mm256_sub_pd(s, _mm256_mul_pd(vh, infection));
        const __m256d e1 = _mm256_add_pd(e, _mm256_mul_pd(vh, de));
        const __m256d i1 = _mm256_add_pd(i, _mm256_mul_pd(vh, di));
        _mm256_storeu_pd(x.s.data() + k, _mm256_max_pd(s1, zero));
        _mm256_storeu_pd(x.e.data() + k, _mm256_max_pd(e1, zero));
        _mm256_storeu_pd(x.i.data() + k, _mm256_max_pd(i1, zero));
    }
    if (k < n) {
        const std::size_t rest = n - k;
        euler_step_scalar({x.s.subspan(k, rest), x.e.subspan(k, rest), x.i.subspan(k, rest)},
                          {u.beta.subspan(k, rest), u.gamma.subspan(k, rest)}, h, eta);
    }
}

void box_margin_avx2(SoaState x, BoxBounds box, std::span<double> margin) {
    const std::size_t n = x.size();
    const __m256d smax = _mm256_set1_pd(box.s_max);
    const __m256d emax = _mm256_set1_pd(box.e_max);
    const __m256d imax = _mm256_set1_pd(box.i_max);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d m = _mm256_loadu_pd(margin.data() + k);
        m = _mm256_min_pd(_mm256_sub_pd(smax, _mm256_loadu_pd(x.s.data() + k)), m);
        m = _mm256_min_pd(_mm256_sub_pd(emax, _mm256_loadu_pd(x.e.data() + k)), m);
        m = _mm256_min_pd(_mm256_sub_pd(imax, _mm256_loadu_pd(x.i.data() + k)), m);
        _mm256_storeu_pd(margin.data() + k, m);
    }
    if (k < n) {
        const std::size_t rest = n - k;
        box_margin_scalar({x.s.subspan(k, rest), x.e.subspan(k, rest), x.i.subspan(k, rest)}, box,
                          margin.subspan(k, rest));
    }
}

}  // namespace seir::kernels::detail
