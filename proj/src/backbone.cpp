#include "scrapnet/backbone.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace scrapnet {

void BackboneParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("backbone alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

double disparity_alpha(double p, int k) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("normalized weight must lie in [0, 1]");
  if (k < 1) throw std::domain_error("degree must be at least 1");
  if (k == 1) return 1.0;
  return std::pow(1.0 - p, k - 1);
}

std::map<CountryPair, EdgeSignificance> edge_significance(const TradeNetwork& network) {
  struct Strength {
    double out = 0.0, in = 0.0;
    int out_degree = 0, in_degree = 0;
  };
  std::map<std::string, Strength> nodes;
  for (const auto& [pair, w] : network.edges) {
    auto& src = nodes[pair.first];
    src.out += w;
    ++src.out_degree;
    auto& dst = nodes[pair.second];
    dst.in += w;
    ++dst.in_degree;
  }

  std::map<CountryPair, EdgeSignificance> out;
  for (const auto& [pair, w] : network.edges) {
    const auto& src = nodes.at(pair.first);
    const auto& dst = nodes.at(pair.second);
    EdgeSignificance sig;
    sig.exporter_degree = src.out_degree;
    sig.importer_degree = dst.in_degree;
    sig.exporter_alpha = disparity_alpha(std::min(1.0, w / src.out), src.out_degree);
    sig.importer_alpha = disparity_alpha(std::min(1.0, w / dst.in), dst.in_degree);
    out.emplace(pair, sig);
  }
  return out;
}

TradeNetwork extract_backbone(const TradeNetwork& network, const BackboneParams& params) {
  params.validate();
  TradeNetwork backbone{network.window, {}};
  for (const auto& [pair, sig] : edge_significance(network)) {
    auto certifies = [&](double side_alpha, int degree) {
      if (degree <= 1) return params.keep_degree_one;
      return side_alpha < params.alpha;
    };
    if (certifies(sig.exporter_alpha, sig.exporter_degree) || certifies(sig.importer_alpha, sig.importer_degree)) {
      backbone.edges.emplace(pair, network.edges.at(pair));
    }
  }
  return backbone;
}

TradeNetwork global_threshold(const TradeNetwork& network, double min_weight) {
  TradeNetwork out{network.window, {}};
  for (const auto& [pair, w] : network.edges) {
    if (w >= min_weight) out.edges.emplace(pair, w);
  }
  return out;
}

}  // namespace scrapnet
