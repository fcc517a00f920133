#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdmpis/law.hpp"
#include "pdmpis/structure.hpp"

namespace pdmpis {

enum class Family { bc, mps, mcs };

std::string_view to_string(Family f) noexcept;
Family parse_family(std::string_view name);

/// Full parameter dimension: d_c for BC, number of MPS or MCS otherwise.
std::size_t theta_dimension(Family family, const CutPathDecomposition& decomp);
std::size_t reduced_dimension(std::size_t full_dim, std::size_t packet_size);

/// theta_i = reduced_{floor(i / k)} (0-based).
std::vector<double> expand_theta(std::span<const double> reduced, std::size_t packet_size,
                                 std::size_t full_dim);
/// Left inverse of expand_theta: first member of each packet.
std::vector<double> contract_theta(std::span<const double> full, std::size_t packet_size);
/// Chain rule through expand_theta: sums each packet.
std::vector<double> reduce_gradient(std::span<const double> full_grad, std::size_t packet_size);

/// Importance-function parameter: reduced coordinates, packet size and box.
struct ThetaParam {
  Family family = Family::mps;
  std::vector<double> reduced;
  std::size_t packet_size = 1;
  std::size_t full_dim = 0;
  std::vector<double> lo;
  std::vector<double> hi;

  std::vector<double> full() const { return expand_theta(reduced, packet_size, full_dim); }
  /// Throws invalid-argument when sizes disagree or values leave the box.
  void check() const;
};

/// Default box [0, 3 / sqrt(reduced dimension)] per reduced coordinate.
ThetaParam make_theta(Family family, const CutPathDecomposition& decomp, std::size_t packet_size,
                      std::vector<double> reduced = {});

/// Mode-only importance function U_theta, held as log U.
class ImportanceFunction {
 public:
  ImportanceFunction(Family family, const CutPathDecomposition& decomp,
                     std::vector<double> theta_full);

  Family family() const noexcept { return family_; }
  const std::vector<double>& theta() const noexcept { return theta_; }
  const CutPathDecomposition& decomposition() const noexcept { return *decomp_; }

  double log_value(ComponentMask broken) const;
  void grad_log_value(ComponentMask broken, std::span<double> out) const;

 private:
  std::size_t count(ComponentMask broken) const;

  Family family_;
  const CutPathDecomposition* decomp_;
  std::vector<double> theta_;
  std::vector<double> prefix_;  // prefix_[b] = theta_0 + ... + theta_{b-1}
};

/// Biased law: lambda_theta^j(z) = lambda_0^j(z) * U(z^j) / U(z). The
/// reconfiguration keeps the broken set, so z^j differs from z only in the
/// broken status of component j. The decomposition must outlive the law.
class BiasedLaw : public AffineLaw {
 public:
  BiasedLaw(const SystemModel& model, ImportanceFunction iff);
  BiasedLaw(const SystemModel& model, RateTable nominal, ImportanceFunction iff);

  const ImportanceFunction& importance() const noexcept { return iff_; }
  void mode_weights(std::span<const std::int8_t> mode, std::span<double> out) const override;

 private:
  ImportanceFunction iff_;
  std::uint64_t id_;
};

/// log U_theta(z).
double if_value(const ImportanceFunction& iff, const SystemModel& model, const SystemState& z);
std::vector<double> grad_log_if(const ImportanceFunction& iff, const SystemModel& model,
                                const SystemState& z);
/// log sum_z' K_0(z, z') U(z') over the nominal kernel support.
double if_minus(const ImportanceFunction& iff, const MarkovLaw& nominal, const SystemState& z);
double biased_intensity(const ImportanceFunction& iff, const MarkovLaw& nominal,
                        const SystemState& z);
/// K_theta(z, .) over the nominal support, normalized in the log domain.
std::vector<KernelPoint> biased_kernel(const ImportanceFunction& iff, const MarkovLaw& nominal,
                                       const SystemState& pre);

}  // namespace pdmpis
