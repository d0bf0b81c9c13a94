#include "hcfl/flsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hcfl {

void AccuracyModel::validate() const
{
  if (!(acc_max > 0.0 && acc_max <= 1.0))
    throw std::invalid_argument("acc_max must lie in (0, 1]");
  if (kappa <= 0)
    throw std::invalid_argument("kappa must be positive");
  if (total_budget < 0)
    throw std::invalid_argument("total_budget must be nonnegative");
  if (reference_rounds == 0)
    throw std::invalid_argument("reference_rounds must be positive");
}

double AccuracyModel::accuracy(std::int64_t images) const
{
  if (images <= 0)
    return 0.0;
  return acc_max * -std::expm1(-static_cast<double>(images) / static_cast<double>(kappa));
}

double TrainingReport::accuracy_on(const LabelSet& labels) const
{
  if (labels.empty())
    return 0.0;
  double sum = 0.0;
  for (auto l : labels)
    if (auto it = per_label_accuracy.find(l); it != per_label_accuracy.end())
      sum += it->second;
  return sum / static_cast<double>(labels.size());
}

DataShares equal_data_shares(std::int64_t total_budget, std::span<const ParticipantId> stations)
{
  DataShares out;
  if (stations.empty())
    return out;
  auto const n    = static_cast<std::int64_t>(stations.size());
  auto const base = total_budget / n;
  auto       rem  = total_budget % n;
  for (auto const& s : stations)
    out[s] = base + (rem-- > 0 ? 1 : 0);
  return out;
}

TrainingReport train(const ModelProposal& model,
                     const AccuracyModel& acc_model,
                     const DataShares&    station_shares,
                     RngStream& /*rng*/)
{
  acc_model.validate();
  if (model.target_labels.empty())
    throw std::invalid_argument("train: target labels must be nonempty");
  if (station_shares.empty())
    throw std::invalid_argument("train: no stations");

  std::int64_t total = 0;
  for (auto const& [s, n] : station_shares)
  {
    if (n < 0)
      throw std::invalid_argument("train: negative data share for " + s.to_string());
    total += n;
  }
  if (total != acc_model.total_budget)
    throw std::invalid_argument("train: station shares sum to " + std::to_string(total) +
                                ", expected " + std::to_string(acc_model.total_budget));

  TrainingReport r;
  r.model           = model.model_id;
  r.rounds_executed = model.rounds;

  double const round_factor =
      std::min(1.0, static_cast<double>(model.rounds) / acc_model.reference_rounds);
  auto const labels = static_cast<std::int64_t>(model.target_labels.size());
  auto const base   = total / labels;
  auto       rem    = total % labels;
  double     sum    = 0.0;
  for (auto l : model.target_labels)
  {
    std::int64_t n = base + (rem-- > 0 ? 1 : 0);
    double       a = acc_model.accuracy(n) * round_factor;
    r.per_label_accuracy[l] = a;
    sum += a;
  }
  r.average_accuracy = sum / static_cast<double>(labels);

  if (total == 0)
  {
    auto const n = static_cast<std::int64_t>(station_shares.size());
    for (auto const& [s, _] : station_shares)
      r.station_contribution[s] = Rational(1, n);
  }
  else
  {
    for (auto const& [s, n] : station_shares)
      r.station_contribution[s] = Rational(n, total);
  }
  return r;
}

double social_utility_metric(Money welfare, const TrainingReport& report)
{
  return static_cast<double>(welfare.gwei()) * report.average_accuracy;
}

double social_utility_metric(Money welfare, const std::optional<TrainingReport>& report)
{
  return report ? social_utility_metric(welfare, *report) : 0.0;
}

bool realized_vs_expected(const TrainingReport& report, const ModelProposal& proposal, double epsilon)
{
  double const expected = boost::rational_cast<double>(proposal.expected_accuracy);
  return report.average_accuracy >= expected * (1.0 - epsilon);
}

}  // namespace hcfl
