#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace phishscope::html {

enum class NodeType { document, element, text, comment };

// Comment-class nodes (comments, doctype, processing instructions) keep
// their raw source text so they serialize back verbatim.
struct Node {
  NodeType type = NodeType::text;
  std::string tag;  // elements only; lowercase
  std::vector<std::pair<std::string, std::string>> attrs;  // insertion order
  std::string text;  // text: decoded character data; comment-class: raw slice
  std::vector<std::unique_ptr<Node>> children;
  Node* parent = nullptr;

  Node* append_child(std::unique_ptr<Node> child);
  std::unique_ptr<Node> detach();  // remove from parent, return ownership
  const std::string* attr(std::string_view name) const;
  void set_attr(std::string_view name, std::string value);
};

struct Document {
  std::unique_ptr<Node> root;  // NodeType::document

  Document();
  Document(Document&&) noexcept = default;
  Document& operator=(Document&&) noexcept = default;
};

// Repairing parser: lowercases tag/attribute names, decodes entities in text
// and attribute values, auto-closes p/li/td/th/tr/dd/dt/option, treats
// script/style as raw text and title/textarea as entity-decoded raw text,
// ignores unmatched close tags. Throws Error(Errc::unparseable_markup) only
// for NUL bytes or invalid UTF-8 — never for ordinary malformed HTML.
Document parse_document(std::string_view html);

std::string serialize(const Document& doc);
std::string serialize_node(const Node& node);

// All element nodes in document (pre-)order.
std::vector<Node*> all_elements(Document& doc);

bool is_void_tag(std::string_view tag);

// True if every text node in the subtree is spaces/tabs/newlines only.
bool subtree_text_is_whitespace(const Node& node);

}  // namespace phishscope::html
