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

#include <arm_neon.h>

#include "seir_mpc/kernels.hpp"

namespace seir::kernels::detail {

// vmulq/vaddq/vsubq only; vfmaq would break equivalence with the scalar path.

void euler_step_neon(SoaState x, SoaInput u, double h, double eta) {
    const std::size_t n = x.size();
    const float64x2_t vh = vdupq_n_f64(h);
    const float64x2_t veta = vdupq_n_f64(eta);
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        const float64x2_t s = vld1q_f64(x.s.data() + k);
        const float64x2_t e = vld1q_f64(x.e.data() + k);
        const float64x2_t i = vld1q_f64(x.i.data() + k);
        const float64x2_t b = vld1q_f64(u.beta.data() + k);
        const float64x2_t g = vld1q_f64(u.gamma.data() + k);
        const float64x2_t infection = vmulq_f64(vmulq_f64(b, s), i);
        const float64x2_t eta_e = vmulq_f64(veta, e);
        const float64x2_t de = vsubq_f64(infection, eta_e);
        const float64x2_t di = vsubq_f64(eta_e, vmulq_f64(g, i));
        const float64x2_t s1 = vsubq_f64(s, vmulq_f64(vh, infection));
        const float64x2_t e1 = vaddq_f64(e, vmulq_f64(vh, de));
        const float64x2_t i1 = vaddq_f64(i, vmulq_f64(vh, di));
        // Select instead of vmaxq so -0.0 maps to +0.0 as in the scalar path.
        vst1q_f64(x.s.data() + k, vbslq_f64(vcgtq_f64(s1, zero), s1, zero));
        vst1q_f64(x.e.data() + k, vbslq_f64(vcgtq_f64(e1, zero), e1, zero));
        vst1q_f64(x.i.data() + k, vbslq_f64(vcgtq_f64(i1, zero), i1, zero));
    }
    if (k < n) {
        const std::size_t rest = n - k;
        euler_step_scalar({x.s.subspan(k, rest), x.e.subspan(k, rest), x.i.subspan(k, rest)},
                          {u.beta.subspan(k, rest), u.gamma.subspan(k, rest)}, h, eta);
    }
}

void box_margin_neon(SoaState x, BoxBounds box, std::span<double> margin) {
    const std::size_t n = x.size();
    const float64x2_t smax = vdupq_n_f64(box.s_max);
    const float64x2_t emax = vdupq_n_f64(box.e_max);
    const float64x2_t imax = vdupq_n_f64(box.i_max);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        float64x2_t m = vld1q_f64(margin.data() + k);
        const float64x2_t ms = vsubq_f64(smax, vld1q_f64(x.s.data() + k));
        const float64x2_t me = vsubq_f64(emax, vld1q_f64(x.e.data() + k));
        const float64x2_t mi = vsubq_f64(imax, vld1q_f64(x.i.data() + k));
        m = vbslq_f64(vcltq_f64(ms, m), ms, m);
        m = vbslq_f64(vcltq_f64(me, m), me, m);
        m = vbslq_f64(vcltq_f64(mi, m), mi, m);
        vst1q_f64(margin.data() + k, m);
    }
    if (k < n) {
        const std::size_t rest = n - k;
        box_margin_scalar({x.s.subspan(k, rest), x.e.subspan(k, rest), x.i.subspan(k, rest)}, box,
                          margin.subspan(k, rest));
    }
}

}  // namespace seir::kernels::detail
