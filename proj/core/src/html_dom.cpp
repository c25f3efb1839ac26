#include "phishscope/html_dom.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <unordered_map>

#include "phishscope/error.hpp"

namespace phishscope::html {

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f'; }

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = lower(c);
  return out;
}

const std::array<std::string_view, 14> kVoidTags = {
    "area", "base", "br",    "col",    "embed",  "hr",    "img",
    "input", "link", "meta", "param",  "source", "track", "wbr"};

bool raw_text_tag(std::string_view tag) { return tag == "script" || tag == "style"; }
bool rcdata_tag(std::string_view tag) { return tag == "title" || tag == "textarea"; }

// Tags implicitly closed when `tag` opens while they sit on top of the stack.
const std::vector<std::string_view>* auto_close_set(std::string_view tag) {
  static const std::vector<std::string_view> p = {"p"};
  static const std::vector<std::string_view> li = {"li"};
  static const std::vector<std::string_view> cell = {"td", "th"};
  static const std::vector<std::string_view> row = {"tr", "td", "th"};
  static const std::vector<std::string_view> dl = {"dd", "dt"};
  static const std::vector<std::string_view> opt = {"option"};
  if (tag == "p") return &p;
  if (tag == "li") return &li;
  if (tag == "td" || tag == "th") return &cell;
  if (tag == "tr") return &row;
  if (tag == "dd" || tag == "dt") return &dl;
  if (tag == "option") return &opt;
  return nullptr;
}

void append_codepoint(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

const std::unordered_map<std::string, std::uint32_t>& named_entities() {
  static const std::unordered_map<std::string, std::uint32_t> table = {
      {"amp", '&'},     {"lt", '<'},      {"gt", '>'},      {"quot", '"'},
      {"apos", '\''},   {"nbsp", 0xA0},   {"copy", 0xA9},   {"reg", 0xAE},
      {"trade", 0x2122}, {"hellip", 0x2026}, {"mdash", 0x2014}, {"ndash", 0x2013},
      {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D},
      {"laquo", 0xAB},  {"raquo", 0xBB},  {"middot", 0xB7}, {"bull", 0x2022},
      {"yen", 0xA5},    {"euro", 0x20AC}, {"pound", 0xA3},  {"cent", 0xA2},
      {"sect", 0xA7},   {"deg", 0xB0},    {"times", 0xD7},  {"divide", 0xF7},
  };
  return table;
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c != '&') {
      out.push_back(c);
      ++i;
      continue;
    }
    std::size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 32) {
      out.push_back('&');
      ++i;
      continue;
    }
    std::string_view body = s.substr(i + 1, semi - i - 1);
    if (!body.empty() && body[0] == '#') {
      std::uint32_t cp = 0;
      bool ok = body.size() > 1;
      if (body.size() > 2 && (body[1] == 'x' || body[1] == 'X')) {
        for (std::size_t k = 2; k < body.size() && ok; ++k) {
          char h = lower(body[k]);
          if (h >= '0' && h <= '9') cp = cp * 16 + static_cast<std::uint32_t>(h - '0');
          else if (h >= 'a' && h <= 'f') cp = cp * 16 + static_cast<std::uint32_t>(h - 'a' + 10);
          else ok = false;
          if (cp > 0x10FFFF) cp = 0x110000;
        }
        ok = ok && body.size() > 2;
      } else {
        for (std::size_t k = 1; k < body.size() && ok; ++k) {
          if (body[k] >= '0' && body[k] <= '9')
            cp = cp * 10 + static_cast<std::uint32_t>(body[k] - '0');
          else
            ok = false;
          if (cp > 0x10FFFF) cp = 0x110000;
        }
      }
      if (ok) {
        append_codepoint(out, cp);
        i = semi + 1;
        continue;
      }
    } else {
      auto it = named_entities().find(std::string(body));
      if (it != named_entities().end()) {
        append_codepoint(out, it->second);
        i = semi + 1;
        continue;
      }
    }
    out.push_back('&');
    ++i;
  }
  return out;
}

std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out.push_back(c);
  }
  return out;
}

std::string escape_attr(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '"') out += "&quot;";
    else if (c == '<') out += "&lt;";
    else out.push_back(c);
  }
  return out;
}

bool valid_utf8(std::string_view s, bool* has_nul) {
  *has_nul = false;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c == 0) {
      *has_nul = true;
      return false;
    }
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      unsigned char cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (extra == 1 && cp < 0x80) return false;   // overlong
    if (extra == 2 && cp < 0x800) return false;  // overlong
    if (extra == 3 && cp < 0x10000) return false;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {
    stack_.push_back(doc_.root.get());
  }

  Document run() {
    while (pos_ < src_.size()) {
      std::size_t lt = src_.find('<', pos_);
      if (lt == std::string_view::npos) {
        add_text(src_.substr(pos_), /*decode=*/true);
        break;
      }
      if (lt > pos_) add_text(src_.substr(pos_, lt - pos_), true);
      pos_ = lt;
      if (!parse_markup()) {
        add_text("<", false);
        ++pos_;
      }
    }
    return std::move(doc_);
  }

 private:
  Node* top() { return stack_.back(); }

  void add_text(std::string_view raw, bool decode) {
    if (raw.empty()) return;
    std::string data = decode ? decode_entities(raw) : std::string(raw);
    auto& kids = top()->children;
    if (!kids.empty() && kids.back()->type == NodeType::text) {
      kids.back()->text += data;  // merge adjacent runs
      return;
    }
    auto node = std::make_unique<Node>();
    node->type = NodeType::text;
    node->text = std::move(data);
    top()->append_child(std::move(node));
  }

  void add_comment(std::string_view raw) {
    auto node = std::make_unique<Node>();
    node->type = NodeType::comment;
    node->text = std::string(raw);
    top()->append_child(std::move(node));
  }

  bool parse_markup() {
    if (pos_ + 1 >= src_.size()) return false;
    char next = src_[pos_ + 1];
    if (next == '!' || next == '?') {
      parse_comment_class();
      return true;
    }
    if (next == '/') {
      parse_close_tag();
      return true;
    }
    if (is_alpha(next)) {
      parse_open_tag();
      return true;
    }
    return false;
  }

  void parse_comment_class() {
    std::size_t start = pos_;
    if (src_.compare(pos_, 4, "<!--") == 0) {
      std::size_t end = src_.find("-->", pos_ + 4);
      if (end == std::string_view::npos) {
        add_comment(src_.substr(start));
        pos_ = src_.size();
      } else {
        add_comment(src_.substr(start, end + 3 - start));
        pos_ = end + 3;
      }
      return;
    }
    std::size_t end = src_.find('>', pos_ + 1);
    if (end == std::string_view::npos) {
      add_comment(src_.substr(start));
      pos_ = src_.size();
    } else {
      add_comment(src_.substr(start, end + 1 - start));
      pos_ = end + 1;
    }
  }

  void parse_close_tag() {
    std::size_t p = pos_ + 2;
    std::size_t name_start = p;
    while (p < src_.size() && !is_space(src_[p]) && src_[p] != '>') ++p;
    std::string name = to_lower(src_.substr(name_start, p - name_start));
    std::size_t end = src_.find('>', p);
    pos_ = end == std::string_view::npos ? src_.size() : end + 1;
    if (name.empty()) return;
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->type == NodeType::element && stack_[i]->tag == name) {
        stack_.resize(i);
        return;
      }
    }
    // Unmatched close tag: ignored.
  }

  void parse_open_tag() {
    std::size_t p = pos_ + 1;
    std::size_t name_start = p;
    while (p < src_.size() && !is_space(src_[p]) && src_[p] != '>' && src_[p] != '/')
      ++p;
    std::string tag = to_lower(src_.substr(name_start, p - name_start));

    auto node = std::make_unique<Node>();
    node->type = NodeType::element;
    node->tag = tag;

    bool self_closing = false;
    while (p < src_.size()) {
      while (p < src_.size() && is_space(src_[p])) ++p;
      if (p >= src_.size()) break;
      if (src_[p] == '>') {
        ++p;
        break;
      }
      if (src_[p] == '/') {
        ++p;
        if (p < src_.size() && src_[p] == '>') {
          self_closing = true;
          ++p;
          break;
        }
        continue;
      }
      std::size_t attr_start = p;
      while (p < src_.size() && !is_space(src_[p]) && src_[p] != '=' &&
             src_[p] != '>' && src_[p] != '/')
        ++p;
      std::string attr_name = to_lower(src_.substr(attr_start, p - attr_start));
      std::string attr_value;
      while (p < src_.size() && is_space(src_[p])) ++p;
      if (p < src_.size() && src_[p] == '=') {
        ++p;
        while (p < src_.size() && is_space(src_[p])) ++p;
        if (p < src_.size() && (src_[p] == '"' || src_[p] == '\'')) {
          char quote = src_[p++];
          std::size_t value_start = p;
          while (p < src_.size() && src_[p] != quote) ++p;
          attr_value = decode_entities(src_.substr(value_start, p - value_start));
          if (p < src_.size()) ++p;
        } else {
          std::size_t value_start = p;
          while (p < src_.size() && !is_space(src_[p]) && src_[p] != '>') ++p;
          attr_value = decode_entities(src_.substr(value_start, p - value_start));
        }
      }
      if (!attr_name.empty() && !node->attr(attr_name))
        node->attrs.emplace_back(std::move(attr_name), std::move(attr_value));
    }
    pos_ = p;

    if (const auto* closes = auto_close_set(tag)) {
      while (stack_.size() > 1) {
        const std::string& open = top()->tag;
        if (std::find(closes->begin(), closes->end(), open) == closes->end()) break;
        stack_.pop_back();
      }
    }

    Node* placed = top()->append_child(std::move(node));
    if (self_closing || is_void_tag(tag)) return;

    if (raw_text_tag(tag) || rcdata_tag(tag)) {
      read_raw_content(placed, tag, rcdata_tag(tag));
      return;
    }
    stack_.push_back(placed);
  }

  // Scan to the matching close tag; content becomes one text child.
  void read_raw_content(Node* element, const std::string& tag, bool decode) {
    const std::string needle = "</" + tag;
    std::size_t search = pos_;
    std::size_t found = std::string_view::npos;
    while (search < src_.size()) {
      std::size_t cand = src_.find('<', search);
      if (cand == std::string_view::npos || cand + needle.size() > src_.size())
        break;
      bool match = true;
      for (std::size_t k = 0; k < needle.size(); ++k) {
        if (lower(src_[cand + k]) != needle[k]) {
          match = false;
          break;
        }
      }
      if (match) {
        char after = cand + needle.size() < src_.size() ? src_[cand + needle.size()] : '>';
        if (after == '>' || is_space(after) || after == '/') {
          found = cand;
          break;
        }
      }
      search = cand + 1;
    }
    std::string_view content;
    if (found == std::string_view::npos) {
      content = src_.substr(pos_);
      pos_ = src_.size();
    } else {
      content = src_.substr(pos_, found - pos_);
      std::size_t end = src_.find('>', found);
      pos_ = end == std::string_view::npos ? src_.size() : end + 1;
    }
    if (!content.empty()) {
      auto text = std::make_unique<Node>();
      text->type = NodeType::text;
      text->text = decode ? decode_entities(content) : std::string(content);
      element->append_child(std::move(text));
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Document doc_;
  std::vector<Node*> stack_;
};

void serialize_into(const Node& node, std::string& out) {
  switch (node.type) {
    case NodeType::document:
      for (const auto& child : node.children) serialize_into(*child, out);
      break;
    case NodeType::text: {
      const Node* p = node.parent;
      if (p && p->type == NodeType::element && raw_text_tag(p->tag))
        out += node.text;
      else
        out += escape_text(node.text);
      break;
    }
    case NodeType::comment:
      out += node.text;
      break;
    case NodeType::element: {
      out += '<';
      out += node.tag;
      for (const auto& [name, value] : node.attrs) {
        out += ' ';
        out += name;
        out += "=\"";
        out += escape_attr(value);
        out += '"';
      }
      out += '>';
      if (is_void_tag(node.tag)) break;
      for (const auto& child : node.children) serialize_into(*child, out);
      out += "</";
      out += node.tag;
      out += '>';
      break;
    }
  }
}

void collect_elements(Node& node, std::vector<Node*>& out) {
  if (node.type == NodeType::element) out.push_back(&node);
  for (auto& child : node.children) collect_elements(*child, out);
}

}  // namespace

Node* Node::append_child(std::unique_ptr<Node> child) {
  child->parent = this;
  children.push_back(std::move(child));
  return children.back().get();
}

std::unique_ptr<Node> Node::detach() {
  if (!parent) return nullptr;
  auto& siblings = parent->children;
  for (auto it = siblings.begin(); it != siblings.end(); ++it) {
    if (it->get() == this) {
      std::unique_ptr<Node> owned = std::move(*it);
      siblings.erase(it);
      owned->parent = nullptr;
      return owned;
    }
  }
  return nullptr;
}

const std::string* Node::attr(std::string_view name) const {
  for (const auto& [key, value] : attrs)
    if (key == name) return &value;
  return nullptr;
}

void Node::set_attr(std::string_view name, std::string value) {
  for (auto& [key, existing] : attrs) {
    if (key == name) {
      existing = std::move(value);
      return;
    }
  }
  attrs.emplace_back(std::string(name), std::move(value));
}

Document::Document() : root(std::make_unique<Node>()) {
  root->type = NodeType::document;
}

Document parse_document(std::string_view html) {
  bool has_nul = false;
  if (!valid_utf8(html, &has_nul)) {
    throw Error(Errc::unparseable_markup,
                has_nul ? "markup contains NUL bytes"
                        : "markup is not valid UTF-8",
                "html");
  }
  return Parser(html).run();
}

std::string serialize(const Document& doc) { return serialize_node(*doc.root); }

std::string serialize_node(const Node& node) {
  std::string out;
  serialize_into(node, out);
  return out;
}

std::vector<Node*> all_elements(Document& doc) {
  std::vector<Node*> out;
  collect_elements(*doc.root, out);
  return out;
}

bool is_void_tag(std::string_view tag) {
  return std::find(kVoidTags.begin(), kVoidTags.end(), tag) != kVoidTags.end();
}

bool subtree_text_is_whitespace(const Node& node) {
  if (node.type == NodeType::text) {
    for (char c : node.text)
      if (c != ' ' && c != '\t' && c != '\r' && c != '\n' && c != '\f') return false;
    return true;
  }
  if (node.type == NodeType::comment) return true;
  for (const auto& child : node.children)
    if (!subtree_text_is_whitespace(*child)) return false;
  return true;
}

}  // namespace phishscope::html
