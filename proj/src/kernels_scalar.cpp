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

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "seir_mpc/kernels.hpp"

namespace seir::kernels {

namespace detail {

namespace {
// Matches _mm256_max_pd(v, 0) / vmaxq_f64 semantics for finite input.
inline double clamp_nonneg(double v) { return v > 0.0 ? v : 0.0; }
}  // namespace

void euler_step_scalar(SoaState x, SoaInput u, double h, double eta) {
    const std::size_t n = x.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double s = x.s[k];
        const double e = x.e[k];
        const double i = x.i[k];
        const double infection = u.beta[k] * s * i;
        const double ds = infection;
        const double de = infection - eta * e;
        const double di = eta * e - u.gamma[k] * i;
        x.s[k] = clamp_nonneg(s - h * ds);
        x.e[k] = clamp_nonneg(e + h * de);
        x.i[k] = clamp_nonneg(i + h * di);
    }
}

void box_margin_scalar(SoaState x, BoxBounds box, std::span<double> margin) {
    const std::size_t n = x.size();
    for (std::size_t k = 0; k < n; ++k) {
        double m = margin[k];
        const double ms = box.s_max - x.s[k];
        const double me = box.e_max - x.e[k];
        const double mi = box.i_max - x.i[k];
        m = ms < m ? ms : m;
        m = me < m ? me : m;
        m = mi < m ? mi : m;
        margin[k] = m;
    }
}

}  // namespace detail

std::string_view name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

bool available(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(SEIR_MPC_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::neon:
#if defined(SEIR_MPC_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& table(Isa isa) {
    static const KernelTable scalar{Isa::scalar, &detail::euler_step_scalar,
                                    &detail::box_margin_scalar};
    if (!available(isa)) {
        throw std::invalid_argument("kernel variant not available: " + std::string(name(isa)));
    }
    switch (isa) {
#if defined(SEIR_MPC_HAVE_AVX2)
        case Isa::avx2: {
            static const KernelTable avx2{Isa::avx2, &detail::euler_step_avx2,
                                          &detail::box_margin_avx2};
            return avx2;
        }
#endif
#if defined(SEIR_MPC_HAVE_NEON)
        case Isa::neon: {
            static const KernelTable neon{Isa::neon, &detail::euler_step_neon,
                                          &detail::box_margin_neon};
            return neon;
        }
#endif
        default: return scalar;
    }
}

const KernelTable& active() {
    static const KernelTable& chosen = []() -> const KernelTable& {
        if (const char* forced = std::getenv("SEIR_MPC_ISA")) {
            const std::string_view want(forced);
            for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
                if (want == name(isa) && available(isa)) return table(isa);
            }
        }
        if (available(Isa::avx2)) return table(Isa::avx2);
        if (available(Isa::neon)) return table(Isa::neon);
        return table(Isa::scalar);
    }();
    return chosen;
}

}  // namespace seir::kernels
