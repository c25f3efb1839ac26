// Acceptance gate. Each check below guards one release criterion and must
// finish inside its time limit; the binary prints one PASS/FAIL line per
// criterion and exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "phishscope/crawler.hpp"
#include "phishscope/error.hpp"
#include "phishscope/eval.hpp"
#include "phishscope/html_dom.hpp"
#include "phishscope/html_simplify.hpp"
#include "phishscope/ocr_simplify.hpp"
#include "phishscope/pipeline.hpp"
#include "phishscope/prompt.hpp"
#include "phishscope/snapshot.hpp"
#include "phishscope/token_budget.hpp"
#include "phishscope/verdict.hpp"
#include "support/corpus.hpp"
#include "support/loopback.hpp"
#include "support/random_html.hpp"
#include "support/responses.hpp"
#include "support/stub_browser.hpp"
#include "support/stub_counters.hpp"
#include "support/temp_dir.hpp"

using namespace phishscope;
using namespace std::chrono_literals;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool condition, const std::string& message) {
  if (!condition) throw Failure(message);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  expect(in.good(), "missing file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool run_criterion(const char* name, double limit_seconds,
                   const std::function<void()>& body) {
  auto start = std::chrono::steady_clock::now();
  std::string error;
  try {
    body();
  } catch (const std::exception& e) {
    error = e.what();
  } catch (...) {
    error = "non-standard exception";
  }
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  bool ok = error.empty() && elapsed < limit_seconds;
  std::printf("%s  %-42s %6.2fs (limit %gs)\n", ok ? "PASS" : "FAIL", name,
              elapsed, limit_seconds);
  if (!ok) {
    std::printf("      reason: %s\n",
                error.empty() ? "time limit exceeded" : error.c_str());
  }
  return ok;
}

// --- criterion 1: metric rows from fixed confusion matrices ----------------

std::vector<std::string> metric_row(const ConfusionMatrix& cm) {
  return {format_percent_1dp(cm.tp, cm.tp + cm.fp),
          format_percent_1dp(cm.tp, cm.tp + cm.fn),
          format_percent_1dp(cm.tp + cm.tn, cm.total()),
          format_percent_1dp(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn)};
}

void check_metric_rows() {
  std::vector<std::string> strong = metric_row({984, 16, 17, 983});
  std::vector<std::string> expected_strong = {"98.3", "98.4", "98.4", "98.4"};
  expect(strong == expected_strong,
         "strong-model row mismatch: got " + strong[0] + "/" + strong[1] +
             "/" + strong[2] + "/" + strong[3]);

  std::vector<std::string> weak = metric_row({867, 133, 15, 985});
  std::vector<std::string> expected_weak = {"98.3", "86.7", "92.6", "92.1"};
  expect(weak == expected_weak,
         "weak-model row mismatch: got " + weak[0] + "/" + weak[1] + "/" +
             weak[2] + "/" + weak[3]);
}

// --- criterion 2: end-to-end corpus run matches the golden report ----------

void check_corpus_run() {
  testsupport::TempDir dir;
  testsupport::CorpusPaths corpus =
      testsupport::write_corpus(dir.sub("corpus"));
  PipelineConfig config = testsupport::corpus_pipeline_config(corpus);
  config.backend.retry_backoff = {std::chrono::milliseconds(1)};
  DatasetManifest manifest = load_manifest(corpus.manifest_path);

  EvaluateOptions first_options;
  first_options.out_dir = dir.sub("run1");
  EvaluateOutcome first = evaluate_manifest(manifest, config, first_options);
  expect(!first.aborted, "corpus run aborted");
  expect(first.attempted == 10, "expected 10 samples");
  expect(first.backend_failures == 1, "expected exactly 1 backend failure");
  expect(first.run_report.key_rule_cm == ConfusionMatrix{5, 1, 0, 4},
         "key-rule confusion matrix drifted");
  const auto& histogram = first.run_report.parse_mode_histogram;
  auto histogram_count = [&](const char* mode) {
    auto it = histogram.find(mode);
    return it == histogram.end() ? 0 : it->second;
  };
  expect(histogram_count("strict") == 5 && histogram_count("lenient") == 2 &&
             histogram_count("heuristic") == 1 && histogram_count("failed") == 2,
         "parse-mode histogram drifted");

  expect(first.run_report.text == slurp(PHISHSCOPE_GOLDEN_DIR "/report.txt"),
         "report text differs from the checked-in golden");

  PipelineConfig serial = config;
  serial.backend.concurrency = 1;
  EvaluateOptions second_options;
  second_options.out_dir = dir.sub("run2");
  EvaluateOutcome second = evaluate_manifest(manifest, serial, second_options);
  expect(second.run_report.text == first.run_report.text &&
             second.run_report.json == first.run_report.json &&
             second.run_report.roc_tsv == first.run_report.roc_tsv,
         "parallel and serial runs produced different report bytes");
}

// --- criterion 3: randomized html reduction safety --------------------------

std::vector<std::string> keep_tags_with_text(html::Document& doc) {
  std::vector<std::string> tags;
  for (html::Node* node : html::all_elements(doc)) {
    if (keep_tag_set().count(node->tag) &&
        !html::subtree_text_is_whitespace(*node)) {
      tags.push_back(node->tag);
    }
  }
  return tags;
}

void check_html_reduction() {
  std::mt19937 rng(424242);
  std::uniform_int_distribution<int> budget_pick(1, 400);
  for (int i = 0; i < 200; ++i) {
    std::string markup = testsupport::random_markup(rng);

    html::Document doc = html::parse_document(markup);
    remove_noise(doc);
    std::vector<std::string> expected = keep_tags_with_text(doc);
    unwrap_non_keep(doc);
    remove_textless(doc);
    shorten_attributes(doc, 64);
    expect(keep_tags_with_text(doc) == expected,
           "a whitelist tag with text did not survive stages 1-4");

    for (int c = 0; c < 5; ++c) {
      auto counter = testsupport::random_counter(rng);
      int budget = budget_pick(rng);
      SimplifyResult result = simplify_html(markup, budget, *counter);
      expect(counter->count(result.html) < budget || result.truncated,
             "output at/over budget without the truncation flag (counter " +
                 counter->name() + ", budget " + std::to_string(budget) + ")");
    }
  }
}

// --- criterion 4: randomized ocr reduction safety ---------------------------

void check_ocr_reduction() {
  std::mt19937 rng(24683579);
  std::uniform_int_distribution<int> line_count(0, 30);
  std::uniform_int_distribution<int> budget_pick(1, 40);
  std::uniform_int_distribution<int> height_pick(0, 7);
  std::uniform_int_distribution<int> word_pick(0, 7);
  const double heights[] = {8, 10, 12, 12, 16, 24, 24, 32};
  const char* words[] = {"verify", "account", "password", "expires",
                         "delivery", "invoice", "support", "reset"};

  for (int i = 0; i < 200; ++i) {
    std::vector<OcrLine> lines;
    int n = line_count(rng);
    for (int k = 0; k < n; ++k) {
      OcrLine line;
      // unique text so survivors map back to exactly one input line
      line.text = std::string(words[word_pick(rng)]) + " " +
                  std::to_string(i) + "-" + std::to_string(k);
      line.font_height = heights[height_pick(rng)];
      lines.push_back(line);
    }
    auto counter = testsupport::random_counter(rng);
    int budget = budget_pick(rng);

    OcrSimplifyResult result = simplify_ocr(lines, budget, *counter);
    expect(counter->count(result.text) < budget, "ocr output not under budget");

    std::vector<std::string> survivors;
    if (!result.text.empty()) {
      std::istringstream stream(result.text);
      std::string piece;
      while (std::getline(stream, piece)) survivors.push_back(piece);
    }

    std::vector<bool> is_survivor(lines.size(), false);
    std::size_t j = 0;
    for (std::size_t k = 0; k < survivors.size(); ++k) {
      bool last = k + 1 == survivors.size();
      bool found = false;
      while (j < lines.size()) {
        const std::string& text = lines[j].text;
        bool match = text == survivors[k] ||
                     (last && result.truncated &&
                      survivors[k].size() < text.size() &&
                      text.compare(0, survivors[k].size(), survivors[k]) == 0);
        ++j;
        if (match) {
          is_survivor[j - 1] = true;
          found = true;
          break;
        }
      }
      expect(found, "survivors are not an in-order subsequence of the input");
    }

    if (!result.truncated && !survivors.empty()) {
      double min_survivor_height = 1e300;
      for (std::size_t k = 0; k < lines.size(); ++k) {
        if (is_survivor[k]) {
          min_survivor_height =
              std::min(min_survivor_height, lines[k].font_height);
        }
      }
      for (std::size_t k = 0; k < lines.size(); ++k) {
        expect(is_survivor[k] || lines[k].font_height <= min_survivor_height,
               "a removed line outranked a survivor's font height");
      }
    }
  }
}

// --- criterion 5: response parsing ladder ------------------------------------

void check_canonical_verdict(const Verdict& verdict, ParseMode mode,
                             const std::string& brand, const char* which) {
  expect(verdict.parse_mode == mode,
         std::string(which) + ": unexpected parse mode");
  expect(verdict.phishing_score.has_value() && *verdict.phishing_score == 9,
         std::string(which) + ": score is not 9");
  expect(verdict.brands.has_value() && *verdict.brands == brand,
         std::string(which) + ": brands mismatch");
  expect(verdict.phishing == TriState::yes &&
             verdict.suspicious_domain == TriState::yes,
         std::string(which) + ": tri-state flags are not both true");
}

void check_response_parsing() {
  check_canonical_verdict(parse_response(testsupport::facebook_response()),
                          ParseMode::strict, "Meta Facebook", "response 1");
  check_canonical_verdict(parse_response(testsupport::dhl_response()),
                          ParseMode::strict, "DHL EXPRESS", "response 2");
  check_canonical_verdict(
      parse_response(testsupport::facebook_response_single_quoted()),
      ParseMode::lenient, "Meta Facebook", "single-quoted response 1");
  check_canonical_verdict(
      parse_response(testsupport::dhl_response_single_quoted()),
      ParseMode::lenient, "DHL EXPRESS", "single-quoted response 2");

  Verdict prose = parse_response(testsupport::prose_unknown_response());
  expect(prose.parse_mode == ParseMode::heuristic,
         "prose response: expected the heuristic tier");
  expect(prose.phishing == TriState::unknown &&
             prose.suspicious_domain == TriState::unknown,
         "prose response: expected unknown/unknown");

  const std::string seeds[] = {
      testsupport::facebook_response(), testsupport::dhl_response(),
      testsupport::facebook_response_single_quoted(),
      testsupport::prose_unknown_response()};
  std::mt19937 rng(97531);
  std::uniform_int_distribution<int> pick_seed(0, 3);
  std::uniform_int_distribution<int> mutation_count(1, 8);
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_int_distribution<int> byte(0, 255);
  const std::string inserts = "\"'`{}[]:,\n\\tTrueFalseNone\xC3\xA9\xF0";

  for (int i = 0; i < 10000; ++i) {
    std::string s = seeds[pick_seed(rng)];
    int n = mutation_count(rng);
    for (int m = 0; m < n; ++m) {
      if (s.empty()) break;
      std::uniform_int_distribution<std::size_t> at(0, s.size() - 1);
      std::size_t pos = at(rng);
      switch (kind(rng)) {
        case 0:
          s[pos] = static_cast<char>(byte(rng));
          break;
        case 1:
          s.erase(pos, std::min<std::size_t>(1 + pos % 37, s.size() - pos));
          break;
        case 2: {
          if (s.size() > 8192) break;
          std::size_t len = std::min<std::size_t>(1 + pos % 53, s.size() - pos);
          s.insert(pos, s.substr(pos, len));
          break;
        }
        case 3:
          s.insert(pos, 1, inserts[pos % inserts.size()]);
          break;
        default:
          s.resize(pos);
          break;
      }
    }
    try {
      Verdict v = parse_response(s);
      (void)classify(v);
      (void)classify_by_score(v, 7);
    } catch (...) {
      throw Failure("parse_response threw on mutated input (case " +
                    std::to_string(i) + ")");
    }
  }
}

// --- criterion 6: roc consistency -------------------------------------------

double pairwise_auc(const std::vector<ScoredSample>& samples) {
  double wins = 0.0;
  long long pairs = 0;
  for (const ScoredSample& pos : samples) {
    if (pos.actual != Label::phishing) continue;
    for (const ScoredSample& neg : samples) {
      if (neg.actual != Label::non_phishing) continue;
      int rank_pos = pos.score ? *pos.score : -1;
      int rank_neg = neg.score ? *neg.score : -1;
      ++pairs;
      if (rank_pos > rank_neg) {
        wins += 1.0;
      } else if (rank_pos == rank_neg) {
        wins += 0.5;
      }
    }
  }
  return wins / static_cast<double>(pairs);
}

double youden_j_at(const std::vector<ScoredSample>& samples, int threshold) {
  std::int64_t tp = 0, fn = 0, fp = 0, tn = 0;
  for (const ScoredSample& s : samples) {
    bool predicted = s.score && *s.score >= threshold;
    if (s.actual == Label::phishing) {
      (predicted ? tp : fn) += 1;
    } else {
      (predicted ? fp : tn) += 1;
    }
  }
  return static_cast<double>(tp) / static_cast<double>(tp + fn) -
         static_cast<double>(fp) / static_cast<double>(fp + tn);
}

std::vector<ScoredSample> random_scored(std::mt19937& rng, int n,
                                        int max_score) {
  std::uniform_int_distribution<int> score_pick(0, max_score);
  std::uniform_int_distribution<int> absent(0, 4);
  std::vector<ScoredSample> samples(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    ScoredSample& s = samples[static_cast<std::size_t>(k)];
    // force one of each class so the curve is defined
    s.actual = k == 0 ? Label::phishing
               : k == 1 ? Label::non_phishing
                        : (rng() % 2 ? Label::phishing : Label::non_phishing);
    if (absent(rng) != 0) s.score = score_pick(rng);
  }
  return samples;
}

void check_roc_consistency() {
  std::mt19937 rng(13579);
  std::uniform_int_distribution<int> size_pick(2, 50);
  for (int i = 0; i < 100; ++i) {
    std::vector<ScoredSample> samples = random_scored(rng, size_pick(rng), 10);
    RocAnalysis roc = roc_curve(samples);
    double oracle = pairwise_auc(samples);
    expect(std::abs(roc.auc - oracle) < 1e-9,
           "trapezoid auc differs from the pairwise estimator (case " +
               std::to_string(i) + ")");
  }

  // constructed plateau: J = 1 for thresholds 3..6; the smallest must win
  std::vector<ScoredSample> plateau;
  for (int k = 0; k < 4; ++k) plateau.push_back({Label::phishing, 6});
  for (int k = 0; k < 4; ++k) plateau.push_back({Label::non_phishing, 2});
  RocAnalysis plateau_roc = roc_curve(plateau);
  expect(plateau_roc.optimal_threshold == 3 &&
             std::abs(plateau_roc.optimal_j - 1.0) < 1e-12,
         "plateau tie did not resolve to the smallest threshold");

  // identical score distributions: J = 0 everywhere, threshold 0 wins
  std::vector<ScoredSample> flat;
  for (int score : {1, 4, 9}) {
    flat.push_back({Label::phishing, score});
    flat.push_back({Label::non_phishing, score});
  }
  RocAnalysis flat_roc = roc_curve(flat);
  expect(flat_roc.optimal_threshold == 0 &&
             std::abs(flat_roc.optimal_j) < 1e-12,
         "all-tied curve did not resolve to threshold 0");

  // randomized tie sweeps over a tiny score alphabet
  for (int i = 0; i < 50; ++i) {
    std::vector<ScoredSample> samples = random_scored(rng, 12, 4);
    RocAnalysis roc = roc_curve(samples);
    int best_threshold = 0;
    double best_j = -2.0;
    for (int t = 0; t <= 11; ++t) {
      double j = youden_j_at(samples, t);
      if (j > best_j + 1e-12) {
        best_j = j;
        best_threshold = t;
      }
    }
    expect(roc.optimal_threshold == best_threshold &&
               std::abs(roc.optimal_j - best_j) < 1e-12,
           "youden optimum disagreed with brute force (case " +
               std::to_string(i) + ")");
  }
}

// --- criterion 7: prompt rendering -------------------------------------------

int fence_marker_lines(const std::string& text) {
  int count = 0;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    if (line == "```") ++count;
  }
  return count;
}

void check_prompt_rendering() {
  PromptBundle golden = prompt_for_snapshot(
      testsupport::prompt_fixture_snapshot(), PipelineConfig{});
  expect(golden.text == slurp(PHISHSCOPE_GOLDEN_DIR "/prompt_fixture.txt"),
         "rendered prompt differs from the checked-in golden");
  expect(fence_marker_lines(golden.text) == 4,
         "golden prompt does not hold exactly two fenced blocks");

  auto counter = make_reference_counter();
  std::mt19937 rng(8642);
  const std::string alphabet = "`\n a{<";
  std::uniform_int_distribution<int> length(0, 120);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int i = 0; i < 300; ++i) {
    std::string html;
    std::string ocr;
    for (int k = length(rng); k > 0; --k) html += alphabet[pick(rng)];
    for (int k = length(rng) / 2; k > 0; --k) ocr += alphabet[pick(rng)];
    PromptBundle bundle =
        build_prompt("http://fuzz.example.test/x", html, ocr, *counter);
    expect(fence_marker_lines(bundle.text) == 4,
           "fuzzed payload broke the two-block fence structure");
    expect(bundle.text.find("````") == std::string::npos,
           "a backtick run of four or more leaked into the prompt");
  }
}

// --- criterion 8: browser capture --------------------------------------------

void check_browser_capture() {
  {
    testsupport::FixtureWebServer web;
    web.add_redirect("/entry", web.url("/final"));
    web.add_page("/final",
                 "<html><head><title>Final</title></head><body>"
                 "<h1>Anchor text</h1>"
                 "<script>document.write('<p>added by script</p>');</script>"
                 "</body></html>");
    testsupport::StubBrowser browser;

    CrawlConfig config;
    config.debug_endpoint = browser.debug_endpoint();
    config.navigation_timeout = 5s;
    config.settle_delay = 0ms;
    config.connect_timeout = 2s;

    PageSnapshot snap = capture(web.url("/entry"), config);
    expect(snap.final_url == web.url("/final"),
           "final_url is not the post-redirect address");
    expect(snap.html.find("Anchor text") != std::string::npos,
           "static content missing from the captured html");
    expect(snap.html.find("added by script") != std::string::npos,
           "script-inserted node missing from the captured html");
    expect(!snap.capture_error, "capture flagged an error");
  }

  int dead_port;
  {
    testsupport::Listener probe;
    dead_port = probe.port();
  }
  CrawlConfig config;
  config.debug_endpoint = "http://127.0.0.1:" + std::to_string(dead_port);
  config.connect_timeout = 1000ms;
  config.navigation_timeout = 1000ms;

  auto start = std::chrono::steady_clock::now();
  bool unreachable = false;
  try {
    capture("http://example.test/", config);
  } catch (const Error& e) {
    unreachable = e.code() == Errc::browser_unreachable;
  }
  auto waited = std::chrono::steady_clock::now() - start;
  expect(unreachable, "dead endpoint did not raise browser_unreachable");
  expect(waited <= config.connect_timeout,
         "unreachable endpoint took longer than one connect timeout");
}

}  // namespace

int main() {
  int failures = 0;
  failures += !run_criterion("metric rows from fixed matrices", 1.0,
                             check_metric_rows);
  failures += !run_criterion("end-to-end corpus run vs golden", 5.0,
                             check_corpus_run);
  failures += !run_criterion("randomized html reduction safety", 30.0,
                             check_html_reduction);
  failures += !run_criterion("randomized ocr reduction safety", 10.0,
                             check_ocr_reduction);
  failures += !run_criterion("response parsing ladder + fuzz", 60.0,
                             check_response_parsing);
  failures += !run_criterion("roc auc and youden tie-breaks", 10.0,
                             check_roc_consistency);
  failures += !run_criterion("prompt rendering and fences", 10.0,
                             check_prompt_rendering);
  failures += !run_criterion("browser capture via stub endpoint", 15.0,
                             check_browser_capture);
  if (failures > 0) {
    std::printf("%d criteria failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
