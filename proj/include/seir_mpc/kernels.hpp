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

#pragma once

// Batched SEIR kernels over structure-of-arrays state.
//
// Each lane is an independent trajectory. The scalar variant is the
// reference; vector variants must reproduce it bit for bit (no fused
// multiply-add, identical operation order). The variant is selected once at
// runtime from the CPU features, and SEIR_MPC_ISA=scalar|avx2|neon forces a
// choice when that variant is available.

#include <cstddef>
#include <span>
#include <string_view>

namespace seir::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view name(Isa isa);

/// Lanes of S, E, I advanced in place.
struct SoaState {
    std::span<double> s;
    std::span<double> e;
    std::span<double> i;

    std::size_t size() const { return s.size(); }
};

struct SoaInput {
    std::span<const double> beta;
    std::span<const double> gamma;
};

struct BoxBounds {
    double s_max;
    double e_max;
    double i_max;
};

struct KernelTable {
    Isa isa;
    /// One explicit Euler step per lane; negative components are clamped to 0.
    void (*euler_step)(SoaState x, SoaInput u, double h, double eta);
    /// margin[k] = min(margin[k], s_max - s[k], e_max - e[k], i_max - i[k]).
    void (*box_margin)(SoaState x, BoxBounds box, std::span<double> margin);
};

bool available(Isa isa);

/// Kernel table for a specific variant. Throws std::invalid_argument if unavailable.
const KernelTable& table(Isa isa);

/// Best variant for this CPU, honouring SEIR_MPC_ISA.
const KernelTable& active();

namespace detail {
void euler_step_scalar(SoaState x, SoaInput u, double h, double eta);
void box_margin_scalar(SoaState x, BoxBounds box, std::span<double> margin);
#if defined(SEIR_MPC_HAVE_AVX2)
void euler_step_avx2(SoaState x, SoaInput u, double h, double eta);
void box_margin_avx2(SoaState x, BoxBounds box, std::span<double> margin);
#endif
#if defined(SEIR_MPC_HAVE_NEON)
void euler_step_neon(SoaState x, SoaInput u, double h, double eta);
void box_margin_neon(SoaState x, BoxBounds box, std::span<double> margin);
#endif
}  // namespace detail

}  // namespace seir::kernels
