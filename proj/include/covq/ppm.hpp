#pragma once

// Pulse-position modulation over ell sub-blocks of m = m_x * m_v modes, and
// the desk-scale output states seen through a memoryless probe.

#include <span>
#include <vector>

#include "covq/finite_field.hpp"
#include "covq/fock.hpp"

namespace covq {

// Largest total Hilbert-space dimension assembled explicitly.
inline constexpr std::size_t kDeskDimension = 4096;

struct PPMConfig {
  int ell = 1;
  int m_x = 1;
  int m_v = 1;

  int m() const noexcept { return m_x * m_v; }
  int n() const noexcept { return ell * m(); }
  void validate() const;
};

// d(x, v) = (x - 1) m_v + v, all 1-based.
int ppm_position(int x, int v, const PPMConfig& cfg);

// |idle>^(z-1) (x) |nonidle> (x) |idle>^(m-z).
Ket ppm_subblock_ket(int z, const PPMConfig& cfg, const Ket& idle, const Ket& nonidle);

// Single-mode probe outputs on the idle and non-idle inputs.
struct ProbeOutputs {
  State idle;     // E(|0><0|)
  State nonidle;  // E(|phi><phi|)
};

ProbeOutputs probe_outputs(const SingleModeChannel& probe, const Ket& idle, const Ket& nonidle);

// Throws ValidationError when d^(m*ell) exceeds kDeskDimension.
void require_desk_scale(const PPMConfig& cfg, int cutoff);

// Output of one sub-block carrying the pulse at z: a product state.
State ppm_subblock_output(int z, const PPMConfig& cfg, const ProbeOutputs& probe);

// (1/m_x) sum_x ppm_subblock_output(d(x, v)).
State key_averaged_subblock(int v, const PPMConfig& cfg, const ProbeOutputs& probe);

// Uniform mixture over all (x^ell, v^ell).
State average_ppm_state(const PPMConfig& cfg, const ProbeOutputs& probe);

// Uniform over x^ell and over the listed coordination sequences. Symbols are
// 0-based (symbol s means v = s + 1).
State protocol_state(const PPMConfig& cfg, const ProbeOutputs& probe, std::span<const SymbolVector> codewords);
State protocol_state(const PPMConfig& cfg, const ProbeOutputs& probe, const HashCodebook& codebook);

// E(|0><0|)^(x)n.
State idle_output_state(const PPMConfig& cfg, const ProbeOutputs& probe);

}  // namespace covq
