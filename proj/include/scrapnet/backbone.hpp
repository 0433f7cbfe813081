#pragma once

#include <map>

#include "scrapnet/trade.hpp"

namespace scrapnet {

struct BackboneParams {
  /// Significance level, 0 < alpha < 1.
  double alpha = 0.05;
  /// When set, a degree-1 endpoint counts as certifying its edge instead of
  /// never certifying it.
  bool keep_degree_one = false;

  /// Throws std::invalid_argument unless 0 < alpha < 1.
  void validate() const;
};

/// Disparity-filter significance (1 - p)^(k - 1) of an edge carrying share
/// `p` of an endpoint's strength, where the endpoint has degree `k`.
/// Returns 1 for k == 1. Throws std::domain_error for p outside [0, 1] or
/// k < 1.
double disparity_alpha(double p, int k);

/// Significance of one edge tested from each endpoint: the exporter side uses
/// out-strength and out-degree, the importer side in-strength and in-degree.
struct EdgeSignificance {
  double exporter_alpha = 1.0;
  double importer_alpha = 1.0;
  int exporter_degree = 0;
  int importer_degree = 0;

  double min_alpha() const { return exporter_alpha < importer_alpha ? exporter_alpha : importer_alpha; }
};

std::map<CountryPair, EdgeSignificance> edge_significance(const TradeNetwork& network);

/// Keeps an edge iff it is significant (alpha_side < params.alpha) from at
/// least one endpoint with degree > 1. Nodes left without edges disappear.
TradeNetwork extract_backbone(const TradeNetwork& network, const BackboneParams& params = {});

/// Comparison baseline: edges with weight >= min_weight.
TradeNetwork global_threshold(const TradeNetwork& network, double min_weight);

}  // namespace scrapnet
