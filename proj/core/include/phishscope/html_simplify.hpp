#pragma once

#include <set>
#include <string>
#include <string_view>

#include "phishscope/html_dom.hpp"
#include "phishscope/token_budget.hpp"

namespace phishscope {

// The fixed whitelist of structural tags that survive the unwrap stage.
const std::set<std::string>& keep_tag_set();

struct SimplifyOptions {
  int max_attr_len = 64;  // stage-4 truncation threshold, characters
};

struct SimplifyResult {
  std::string html;
  bool truncated = false;          // budget unreachable even after pruning
  bool removed_keep_tags = false;  // midpoint pruning deleted whitelist tags
};

// Pipeline: (1) drop style/script/comment nodes, stop early when the token
// count is already under budget; (2) unwrap elements outside the whitelist,
// splicing children into the parent in place; (3) drop elements whose
// subtree holds no text (img/hr/meta/title are kept for their attributes);
// (4) shorten base64 image sources and long link targets, stop early when
// under budget; (5) repeatedly remove the element at the document midpoint,
// never touching the paths to the first and last elements, until the count
// drops under budget. All comparisons are strict less-than.
// Errors: unparseable_markup (NUL bytes / invalid UTF-8 only).
SimplifyResult simplify_html(std::string_view html, int budget,
                             const TokenCounter& counter,
                             const SimplifyOptions& options = {});

// Stage 4 as a standalone operation.
std::string shorten_link_attributes(std::string_view html, int max_attr_len);

// Individual stages, exposed for direct inspection on a parsed document.
void remove_noise(html::Document& doc);                         // stage 1
void unwrap_non_keep(html::Document& doc);                      // stage 2
void remove_textless(html::Document& doc);                      // stage 3
void shorten_attributes(html::Document& doc, int max_attr_len); // stage 4

// One stage-5 removal; returns false when no removable element remains.
// Sets *removed_keep_tag when the removed subtree contained whitelist tags.
bool prune_midpoint_once(html::Document& doc, bool* removed_keep_tag);

}  // namespace phishscope
