#include "phishscope/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "phishscope/error.hpp"

namespace phishscope {

namespace {

using nlohmann::json;

double ratio(std::int64_t num, std::int64_t den, bool* degenerate) {
  if (den == 0) {
    *degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string format_rate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

ConfusionMatrix confusion(const std::vector<std::pair<Label, Label>>& pairs) {
  ConfusionMatrix cm;
  for (const auto& [actual, predicted] : pairs) {
    if (actual == Label::phishing)
      (predicted == Label::phishing ? cm.tp : cm.fn)++;
    else
      (predicted == Label::phishing ? cm.fp : cm.tn)++;
  }
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
  Metrics m;
  m.precision = ratio(cm.tp, cm.tp + cm.fp, &m.degenerate);
  m.recall = ratio(cm.tp, cm.tp + cm.fn, &m.degenerate);
  m.accuracy = ratio(cm.tp + cm.tn, cm.total(), &m.degenerate);
  m.f_measure = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn, &m.degenerate);
  return m;
}

std::string format_percent_1dp(std::int64_t num, std::int64_t den) {
  if (den <= 0) return "0.0";
  // tenths of a percent, rounded half-up: floor(num*1000/den + 1/2).
  std::int64_t tenths = (2000 * num + den) / (2 * den);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%lld",
                static_cast<long long>(tenths / 10),
                static_cast<long long>(tenths % 10));
  return buf;
}

RocAnalysis roc_curve(const std::vector<ScoredSample>& scored) {
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
  for (const auto& s : scored)
    (s.actual == Label::phishing ? positives : negatives)++;
  if (positives == 0 || negatives == 0)
    throw Error(Errc::degenerate_class_balance,
                "ROC requires at least one sample of each class",
                positives == 0 ? "phishing" : "non_phishing");

  RocAnalysis roc;
  for (int t = 0; t <= 11; ++t) {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    for (const auto& s : scored) {
      const bool predicted_phishing = s.score && *s.score >= t;
      if (!predicted_phishing) continue;
      (s.actual == Label::phishing ? tp : fp)++;
    }
    RocPoint p;
    p.threshold = t;
    p.tpr = static_cast<double>(tp) / static_cast<double>(positives);
    p.fpr = static_cast<double>(fp) / static_cast<double>(negatives);
    roc.points.push_back(p);
  }

  // Trapezoid over the polyline from (0,0) to (1,1). The (1,1) anchor covers
  // score-absent samples, which no threshold ever flips to positive.
  std::vector<std::pair<double, double>> path;
  path.reserve(roc.points.size() + 1);
  for (const auto& p : roc.points) path.emplace_back(p.fpr, p.tpr);
  path.emplace_back(1.0, 1.0);
  std::sort(path.begin(), path.end());
  double auc = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const auto& [x0, y0] = path[i - 1];
    const auto& [x1, y1] = path[i];
    auc += (x1 - x0) * (y0 + y1) / 2.0;
  }
  roc.auc = auc;

  auto [threshold, j] = youden_optimal(roc);
  roc.optimal_threshold = threshold;
  roc.optimal_j = j;
  return roc;
}

std::pair<int, double> youden_optimal(const RocAnalysis& roc) {
  // J values are differences of count quotients; mathematically equal values
  // can still differ by a few ulp depending on operand order (1 - 5/6 vs
  // 3/6 - 2/6). Genuinely distinct values differ by at least
  // 1/(positives*negatives), so this slack only absorbs rounding noise and
  // such ties resolve to the smaller threshold.
  constexpr double kTieSlack = 1e-12;
  int best_threshold = 0;
  double best_j = -2.0;
  for (const auto& p : roc.points) {
    const double j = p.tpr - p.fpr;
    if (j > best_j + kTieSlack) {
      best_j = j;
      best_threshold = p.threshold;
    }
  }
  return {best_threshold, best_j};
}

RunReport report(const DatasetManifest& manifest,
                 const std::map<std::string, Verdict>& verdicts) {
  RunReport r;
  std::vector<std::pair<Label, Label>> key_pairs;
  std::vector<ScoredSample> scored;

  for (const auto& entry : manifest.entries) {
    auto it = verdicts.find(entry.id);
    if (it == verdicts.end())
      throw Error(Errc::missing_verdict, "no verdict for manifest entry",
                  entry.id);
    const Verdict& v = it->second;
    ++r.sample_count;
    key_pairs.emplace_back(entry.label, classify(v));
    scored.push_back({entry.label, v.phishing_score});
    r.parse_mode_histogram[std::string(parse_mode_name(v.parse_mode))]++;
    if (v.phishing == TriState::unknown) ++r.unknown_phishing;
    if (v.suspicious_domain == TriState::unknown) ++r.unknown_suspicious;
    if (!v.phishing_score) ++r.score_absent;
    if (v.parse_mode == ParseMode::failed) ++r.failed_parses;
  }

  r.key_rule_cm = confusion(key_pairs);
  r.key_rule_metrics = metrics(r.key_rule_cm);

  try {
    r.roc = roc_curve(scored);
  } catch (const Error& e) {
    if (e.code() != Errc::degenerate_class_balance) throw;
    r.degenerate_class_balance = true;
  }

  if (r.roc) {
    std::vector<std::pair<Label, Label>> score_pairs;
    for (std::size_t i = 0; i < scored.size(); ++i) {
      Verdict v;
      v.phishing_score = scored[i].score;
      score_pairs.emplace_back(scored[i].actual,
                               classify_by_score(v, r.roc->optimal_threshold));
    }
    r.score_rule_cm = confusion(score_pairs);
    r.score_rule_metrics = metrics(r.score_rule_cm);

    std::string tsv;
    for (const auto& p : r.roc->points) {
      tsv += std::to_string(p.threshold);
      tsv += '\t';
      tsv += format_rate(p.fpr);
      tsv += '\t';
      tsv += format_rate(p.tpr);
      tsv += '\n';
    }
    r.roc_tsv = std::move(tsv);
  }

  auto metric_lines = [](const ConfusionMatrix& cm) {
    std::ostringstream out;
    out << "  confusion: tp=" << cm.tp << " fn=" << cm.fn << " fp=" << cm.fp
        << " tn=" << cm.tn << "\n";
    out << "  precision: " << format_percent_1dp(cm.tp, cm.tp + cm.fp) << "%\n";
    out << "  recall:    " << format_percent_1dp(cm.tp, cm.tp + cm.fn) << "%\n";
    out << "  accuracy:  " << format_percent_1dp(cm.tp + cm.tn, cm.total())
        << "%\n";
    out << "  f-measure: "
        << format_percent_1dp(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn) << "%\n";
    return out.str();
  };

  std::ostringstream text;
  text << "evaluation report\n";
  text << "=================\n";
  text << "samples: " << r.sample_count << "\n\n";
  text << "key rule (phishing or suspicious_domain true)\n";
  text << metric_lines(r.key_rule_cm);
  text << "\n";
  if (r.roc) {
    text << "score rule at optimal threshold " << r.roc->optimal_threshold
         << " (Youden J=" << format_rate(r.roc->optimal_j) << ")\n";
    text << metric_lines(r.score_rule_cm);
    text << "\n";
    text << "roc auc: " << format_rate(r.roc->auc) << "\n";
    text << "roc points (threshold fpr tpr):\n";
    for (const auto& p : r.roc->points)
      text << "  " << p.threshold << "\t" << format_rate(p.fpr) << "\t"
           << format_rate(p.tpr) << "\n";
  } else {
    text << "roc: skipped (degenerate class balance: need both classes)\n";
  }
  text << "\n";
  text << "parse modes:\n";
  for (const auto& [mode, count] : r.parse_mode_histogram)
    text << "  " << mode << ": " << count << "\n";
  text << "unknown phishing answers: " << r.unknown_phishing << "\n";
  text << "unknown suspicious_domain answers: " << r.unknown_suspicious << "\n";
  text << "score absent: " << r.score_absent << "\n";
  text << "failed parses: " << r.failed_parses << "\n";
  r.text = text.str();

  json doc;
  doc["samples"] = r.sample_count;
  doc["key_rule"] = {
      {"tp", r.key_rule_cm.tp},
      {"fn", r.key_rule_cm.fn},
      {"fp", r.key_rule_cm.fp},
      {"tn", r.key_rule_cm.tn},
      {"precision", r.key_rule_metrics.precision},
      {"recall", r.key_rule_metrics.recall},
      {"accuracy", r.key_rule_metrics.accuracy},
      {"f_measure", r.key_rule_metrics.f_measure},
      {"degenerate", r.key_rule_metrics.degenerate},
  };
  if (r.roc) {
    doc["score_rule"] = {
        {"optimal_threshold", r.roc->optimal_threshold},
        {"optimal_j", r.roc->optimal_j},
        {"tp", r.score_rule_cm.tp},
        {"fn", r.score_rule_cm.fn},
        {"fp", r.score_rule_cm.fp},
        {"tn", r.score_rule_cm.tn},
        {"precision", r.score_rule_metrics.precision},
        {"recall", r.score_rule_metrics.recall},
        {"accuracy", r.score_rule_metrics.accuracy},
        {"f_measure", r.score_rule_metrics.f_measure},
    };
    doc["auc"] = r.roc->auc;
    json points = json::array();
    for (const auto& p : r.roc->points)
      points.push_back({{"threshold", p.threshold}, {"fpr", p.fpr}, {"tpr", p.tpr}});
    doc["roc_points"] = std::move(points);
  }
  doc["degenerate_class_balance"] = r.degenerate_class_balance;
  doc["parse_modes"] = r.parse_mode_histogram;
  doc["unknown_phishing"] = r.unknown_phishing;
  doc["unknown_suspicious"] = r.unknown_suspicious;
  doc["score_absent"] = r.score_absent;
  doc["failed_parses"] = r.failed_parses;
  r.json = doc.dump(2) + "\n";

  return r;
}

}  // namespace phishscope
