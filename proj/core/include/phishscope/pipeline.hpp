#pragma once

#include <memory>
#include <string>
#include <vector>

#include "phishscope/eval.hpp"
#include "phishscope/html_simplify.hpp"
#include "phishscope/llm_client.hpp"
#include "phishscope/ocr_simplify.hpp"
#include "phishscope/prompt.hpp"
#include "phishscope/snapshot.hpp"
#include "phishscope/token_budget.hpp"
#include "phishscope/verdict.hpp"

namespace phishscope {

struct PipelineConfig {
  TokenBudget budget = default_budget();
  std::shared_ptr<const TokenCounter> counter = make_reference_counter();
  SimplifyOptions simplify;
  BackendConfig backend;
  std::string template_text;  // empty = built-in template
};

struct SimplifiedInputs {
  std::string html;
  std::string ocr;
  TruncationFlags flags;
  bool removed_keep_tags = false;
};

SimplifiedInputs simplify_snapshot(const PageSnapshot& snapshot,
                                   const PipelineConfig& config);

PromptBundle prompt_for_snapshot(const PageSnapshot& snapshot,
                                 const PipelineConfig& config);

struct ClassifyOutcome {
  PromptBundle prompt;
  RawResponse response;
  Verdict verdict;
  Label label = Label::non_phishing;
};

// simplify -> prompt -> complete -> parse -> classify for one snapshot.
// Backend errors propagate.
ClassifyOutcome classify_snapshot(const PageSnapshot& snapshot,
                                  const PipelineConfig& config);

struct EvaluateOptions {
  std::string out_dir;  // per-sample artifacts and report files; "" = none
  double abort_failure_ratio = 0.10;  // abort when failures exceed this share
};

struct EvaluateOutcome {
  RunReport run_report;
  int attempted = 0;
  int backend_failures = 0;
  bool aborted = false;  // failure share exceeded abort_failure_ratio
  std::vector<std::string> failure_ids;
};

// Classifies every manifest entry (worker pool capped at
// config.backend.concurrency). Individual backend failures become
// parse_mode=failed verdicts and the run continues; when the failure share
// exceeds abort_failure_ratio the outcome is marked aborted and no report is
// produced. Artifacts written under out_dir: <id>.response.txt,
// <id>.verdict.json (and <id>.error.txt for failures), report.txt,
// report.json, roc.tsv, run_meta.json (the only timestamped file).
EvaluateOutcome evaluate_manifest(const DatasetManifest& manifest,
                                  const PipelineConfig& config,
                                  const EvaluateOptions& options);

}  // namespace phishscope
