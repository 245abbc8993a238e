#include "covq/ppm.hpp"

#include <string>

namespace covq {

void PPMConfig::validate() const {
  if (ell < 1 || m_x < 1 || m_v < 1) throw ValidationError("PPM parameters ell, m_x, m_v must be at least 1");
}

int ppm_position(int x, int v, const PPMConfig& cfg) {
  cfg.validate();
  if (x < 1 || x > cfg.m_x) throw ValidationError("key symbol x outside [1, m_x]");
  if (v < 1 || v > cfg.m_v) throw ValidationError("coordination symbol v outside [1, m_v]");
  return (x - 1) * cfg.m_v + v;
}

Ket ppm_subblock_ket(int z, const PPMConfig& cfg, const Ket& idle, const Ket& nonidle) {
  cfg.validate();
  if (z < 1 || z > cfg.m()) throw ValidationError("pulse position outside [1, m]");
  if (idle.dims() != nonidle.dims() || idle.mode_count() != 1)
    throw DimensionError("idle and non-idle kets must be single-mode with equal cutoffs");
  std::vector<Ket> modes(static_cast<std::size_t>(cfg.m()), idle);
  modes[static_cast<std::size_t>(z - 1)] = nonidle;
  return tensor(std::span<const Ket>(modes));
}

ProbeOutputs probe_outputs(const SingleModeChannel& probe, const Ket& idle, const Ket& nonidle) {
  return {probe(pure_state(idle)), probe(pure_state(nonidle))};
}

void require_desk_scale(const PPMConfig& cfg, int cutoff) {
  cfg.validate();
  std::size_t dim = 1;
  for (int i = 0; i < cfg.n(); ++i) {
    dim *= static_cast<std::size_t>(cutoff);
    if (dim > kDeskDimension)
      throw ValidationError("desk-scale bound exceeded: cutoff^(m*ell) > " + std::to_string(kDeskDimension));
  }
}

namespace {

int probe_cutoff(const ProbeOutputs& probe) {
  if (probe.idle.dims() != probe.nonidle.dims() || probe.idle.mode_count() != 1)
    throw DimensionError("probe outputs must be single-mode with equal cutoffs");
  return probe.idle.cutoff();
}

State mix(const std::vector<State>& states) {
  MatrixXc m = MatrixXc::Zero(states.front().dimension(), states.front().dimension());
  double deficit = 0.0;
  for (const State& s : states) {
    m += s.matrix();
    deficit = std::max(deficit, s.truncation_deficit());
  }
  m /= static_cast<double>(states.size());
  return State(std::move(m), states.front().dims(), deficit);
}

}  // namespace

State ppm_subblock_output(int z, const PPMConfig& cfg, const ProbeOutputs& probe) {
  cfg.validate();
  if (z < 1 || z > cfg.m()) throw ValidationError("pulse position outside [1, m]");
  (void)probe_cutoff(probe);
  std::vector<State> modes(static_cast<std::size_t>(cfg.m()), probe.idle);
  modes[static_cast<std::size_t>(z - 1)] = probe.nonidle;
  return tensor<Complex>(std::span<const State>(modes));
}

State key_averaged_subblock(int v, const PPMConfig& cfg, const ProbeOutputs& probe) {
  std::vector<State> terms;
  terms.reserve(static_cast<std::size_t>(cfg.m_x));
  for (int x = 1; x <= cfg.m_x; ++x) terms.push_back(ppm_subblock_output(ppm_position(x, v, cfg), cfg, probe));
  return mix(terms);
}

State average_ppm_state(const PPMConfig& cfg, const ProbeOutputs& probe) {
  require_desk_scale(cfg, probe_cutoff(probe));
  std::vector<State> per_v;
  for (int v = 1; v <= cfg.m_v; ++v) per_v.push_back(key_averaged_subblock(v, cfg, probe));
  const State block = mix(per_v);
  return tensor_power(block, cfg.ell);
}

State protocol_state(const PPMConfig& cfg, const ProbeOutputs& probe, std::span<const SymbolVector> codewords) {
  require_desk_scale(cfg, probe_cutoff(probe));
  if (codewords.empty()) throw ValidationError("codebook is empty");
  std::vector<State> per_v;
  for (int v = 1; v <= cfg.m_v; ++v) per_v.push_back(key_averaged_subblock(v, cfg, probe));

  const Eigen::Index dim = per_v.front().dimension();
  Eigen::Index total = 1;
  for (int i = 0; i < cfg.ell; ++i) total *= dim;
  MatrixXc acc = MatrixXc::Zero(total, total);
  std::vector<int> dims;
  for (int i = 0; i < cfg.ell; ++i) dims.insert(dims.end(), per_v.front().dims().begin(), per_v.front().dims().end());
  for (const SymbolVector& w : codewords) {
    if (static_cast<int>(w.size()) != cfg.ell) throw DimensionError("codeword length differs from ell");
    std::vector<State> factors;
    for (int s : w) {
      if (s < 0 || s >= cfg.m_v) throw ValidationError("codeword symbol outside [0, m_v)");
      factors.push_back(per_v[static_cast<std::size_t>(s)]);
    }
    acc += tensor<Complex>(std::span<const State>(factors)).matrix();
  }
  acc /= static_cast<double>(codewords.size());
  return State(std::move(acc), std::move(dims), per_v.front().truncation_deficit());
}

State protocol_state(const PPMConfig& cfg, const ProbeOutputs& probe, const HashCodebook& codebook) {
  if (codebook.f.field.symbol_size() != cfg.m_v || codebook.f.field.length() != cfg.ell)
    throw DimensionError("codebook field does not match (m_v, ell)");
  return protocol_state(cfg, probe, std::span<const SymbolVector>(codebook.codewords));
}

State idle_output_state(const PPMConfig& cfg, const ProbeOutputs& probe) {
  require_desk_scale(cfg, probe_cutoff(probe));
  return tensor_power(probe.idle, cfg.n());
}

}  // namespace covq
