#include "phishscope/html_simplify.hpp"

#include <unordered_set>

namespace phishscope {

using html::Document;
using html::Node;
using html::NodeType;

const std::set<std::string>& keep_tag_set() {
  static const std::set<std::string> tags = {
      "head", "title", "meta", "body", "h1", "h2",  "h3",    "h4",
      "h5",   "h6",    "p",    "strong", "a", "img", "hr",   "table",
      "tbody", "tr",   "th",   "td",   "ol", "ul",  "li",   "ruby",
      "label"};
  return tags;
}

namespace {

bool attr_signal_tag(const std::string& tag) {
  return tag == "img" || tag == "hr" || tag == "meta" || tag == "title";
}

bool subtree_has_attr_signal(const Node& node) {
  if (node.type == NodeType::element && attr_signal_tag(node.tag)) return true;
  for (const auto& child : node.children)
    if (subtree_has_attr_signal(*child)) return true;
  return false;
}

bool subtree_has_keep_tag(const Node& node) {
  if (node.type == NodeType::element && keep_tag_set().count(node.tag)) return true;
  for (const auto& child : node.children)
    if (subtree_has_keep_tag(*child)) return true;
  return false;
}

void remove_noise_in(Node& node) {
  auto& kids = node.children;
  for (std::size_t i = 0; i < kids.size();) {
    Node& child = *kids[i];
    if (child.type == NodeType::comment ||
        (child.type == NodeType::element &&
         (child.tag == "script" || child.tag == "style"))) {
      kids.erase(kids.begin() + static_cast<std::ptrdiff_t>(i));
      continue;
    }
    remove_noise_in(child);
    ++i;
  }
}

void unwrap_in(Node& node) {
  auto& kids = node.children;
  for (std::size_t i = 0; i < kids.size();) {
    Node& child = *kids[i];
    if (child.type != NodeType::element) {
      ++i;
      continue;
    }
    unwrap_in(child);
    if (keep_tag_set().count(child.tag)) {
      ++i;
      continue;
    }
    // Splice grandchildren into this node at the child's position.
    std::unique_ptr<Node> owned = std::move(kids[i]);
    kids.erase(kids.begin() + static_cast<std::ptrdiff_t>(i));
    for (std::size_t k = 0; k < owned->children.size(); ++k) {
      owned->children[k]->parent = &node;
      kids.insert(kids.begin() + static_cast<std::ptrdiff_t>(i + k),
                  std::move(owned->children[k]));
    }
    // Re-examine from the splice point; grandchildren are already unwrapped.
    // Merge is unnecessary for correctness; text nodes may sit adjacent.
  }
}

// Bottom-up so emptied containers cascade away in one pass.
void remove_textless_in(Node& node) {
  auto& kids = node.children;
  for (std::size_t i = 0; i < kids.size();) {
    Node& child = *kids[i];
    if (child.type != NodeType::element) {
      ++i;
      continue;
    }
    remove_textless_in(child);
    if (html::subtree_text_is_whitespace(child) && !attr_signal_tag(child.tag) &&
        !subtree_has_attr_signal(child)) {
      kids.erase(kids.begin() + static_cast<std::ptrdiff_t>(i));
      continue;
    }
    ++i;
  }
}

bool base64_data_uri(const std::string& value) {
  return value.rfind("data:", 0) == 0 &&
         value.find(";base64,") != std::string::npos;
}

void shorten_in(Node& node, std::size_t max_len) {
  if (node.type == NodeType::element) {
    if (node.tag == "img") {
      if (const std::string* src = node.attr("src")) {
        if (base64_data_uri(*src) && src->size() > max_len)
          node.set_attr("src", src->substr(0, max_len) + "...");
      }
    } else if (node.tag == "a") {
      if (const std::string* href = node.attr("href")) {
        if (href->size() > max_len)
          node.set_attr("href", href->substr(0, max_len) + "...");
      }
    }
  }
  for (auto& child : node.children) shorten_in(*child, max_len);
}

}  // namespace

void remove_noise(Document& doc) { remove_noise_in(*doc.root); }
void unwrap_non_keep(Document& doc) { unwrap_in(*doc.root); }
void remove_textless(Document& doc) { remove_textless_in(*doc.root); }

void shorten_attributes(Document& doc, int max_attr_len) {
  if (max_attr_len < 0) max_attr_len = 0;
  shorten_in(*doc.root, static_cast<std::size_t>(max_attr_len));
}

bool prune_midpoint_once(Document& doc, bool* removed_keep_tag) {
  std::vector<Node*> elements = html::all_elements(doc);
  if (elements.empty()) return false;

  std::unordered_set<const Node*> protected_nodes;
  for (const Node* n = elements.front(); n; n = n->parent) protected_nodes.insert(n);
  for (const Node* n = elements.back(); n; n = n->parent) protected_nodes.insert(n);

  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(elements.size());
  const std::ptrdiff_t mid = n / 2;
  // Nearest unprotected element to the midpoint: mid, mid+1, mid-1, mid+2, …
  for (std::ptrdiff_t step = 0; step < n; ++step) {
    std::ptrdiff_t delta = (step + 1) / 2;
    if (step % 2 == 1) delta = -delta;
    std::ptrdiff_t idx = mid + delta;
    if (idx < 0 || idx >= n) continue;
    Node* victim = elements[static_cast<std::size_t>(idx)];
    if (protected_nodes.count(victim)) continue;
    if (removed_keep_tag && subtree_has_keep_tag(*victim)) *removed_keep_tag = true;
    victim->detach();
    return true;
  }
  return false;
}

SimplifyResult simplify_html(std::string_view html_text, int budget,
                             const TokenCounter& counter,
                             const SimplifyOptions& options) {
  Document doc = html::parse_document(html_text);
  SimplifyResult result;

  auto under_budget = [&]() {
    result.html = html::serialize(doc);
    return counter.count(result.html) < budget;
  };

  remove_noise(doc);
  if (under_budget()) return result;

  unwrap_non_keep(doc);
  remove_textless(doc);
  shorten_attributes(doc, options.max_attr_len);
  if (under_budget()) return result;

  while (true) {
    if (!prune_midpoint_once(doc, &result.removed_keep_tags)) {
      result.truncated = true;
      break;
    }
    if (under_budget()) return result;
  }
  result.html = html::serialize(doc);
  return result;
}

std::string shorten_link_attributes(std::string_view html_text, int max_attr_len) {
  Document doc = html::parse_document(html_text);
  shorten_attributes(doc, max_attr_len);
  return html::serialize(doc);
}

}  // namespace phishscope
