#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phishscope/snapshot.hpp"
#include "phishscope/verdict.hpp"

namespace phishscope {

// Phishing is the positive class.
struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fn = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fn + fp + tn; }
  friend bool operator==(const ConfusionMatrix& a, const ConfusionMatrix& b) {
    return a.tp == b.tp && a.fn == b.fn && a.fp == b.fp && a.tn == b.tn;
  }
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  double f_measure = 0.0;
  bool degenerate = false;  // some denominator was 0/0 (reported as 0)
};

struct RocPoint {
  int threshold = 0;  // 0..11
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocAnalysis {
  std::vector<RocPoint> points;  // ordered by threshold 0..11
  double auc = 0.0;
  int optimal_threshold = 0;
  double optimal_j = 0.0;
};

struct ScoredSample {
  Label actual = Label::non_phishing;
  std::optional<int> score;  // absent = never predicted phishing
};

// pairs are (actual, predicted).
ConfusionMatrix confusion(const std::vector<std::pair<Label, Label>>& pairs);

Metrics metrics(const ConfusionMatrix& cm);

// Half-up one-decimal percent of num/den, computed in integer arithmetic so
// boundary values (e.g. 1967/2000 = 98.35%) round predictably. den <= 0
// yields "0.0".
std::string format_percent_1dp(std::int64_t num, std::int64_t den);

// ROC over thresholds 0..11 under the score rule; samples without a score
// count as non-phishing at every threshold. AUC is the trapezoid over the
// curve (anchored at (1,1)), which equals the pairwise-comparison estimator
// with absent scores ranked below 0 and ties counted half.
// Errors: degenerate_class_balance unless both classes are present.
RocAnalysis roc_curve(const std::vector<ScoredSample>& scored);

// Argmax of J = tpr - fpr over the curve's points; smallest threshold wins
// ties, including values that are equal up to floating-point rounding noise.
std::pair<int, double> youden_optimal(const RocAnalysis& roc);

struct RunReport {
  int sample_count = 0;
  ConfusionMatrix key_rule_cm;
  Metrics key_rule_metrics;
  std::optional<RocAnalysis> roc;     // absent when class balance degenerate
  ConfusionMatrix score_rule_cm;      // at the Youden-optimal threshold
  Metrics score_rule_metrics;
  bool degenerate_class_balance = false;
  std::map<std::string, int> parse_mode_histogram;
  int unknown_phishing = 0;      // verdicts with phishing == unknown
  int unknown_suspicious = 0;    // verdicts with suspicious_domain == unknown
  int score_absent = 0;
  int failed_parses = 0;

  std::string text;     // human-readable report
  std::string json;     // machine-readable mirror (sorted keys, byte-stable)
  std::string roc_tsv;  // "threshold\tfpr\ttpr" per line; empty if no ROC
};

// Aggregates one verdict per manifest entry. A degenerate class balance is
// surfaced inside the report, never thrown.
// Errors: missing_verdict (detail = entry id).
RunReport report(const DatasetManifest& manifest,
                 const std::map<std::string, Verdict>& verdicts);

}  // namespace phishscope
