#include "med/edittree.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "med/utf8.hpp"

namespace med::edit {

EditTreeRef EditTree::make_leaf(std::string source, std::string target) {
  return EditTreeRef(
      new EditTree(Substitution{std::move(source), std::move(target)}));
}

EditTreeRef EditTree::make_node(std::size_t prefix_len, std::size_t suffix_len,
                                EditTreeRef left, EditTreeRef right) {
  return EditTreeRef(new EditTree(
      Interior{prefix_len, suffix_len, std::move(left), std::move(right)}));
}

bool operator==(const EditTree& a, const EditTree& b) {
  if (a.is_leaf() != b.is_leaf()) return false;
  if (a.is_leaf()) {
    return a.leaf().source == b.leaf().source &&
           a.leaf().target == b.leaf().target;
  }
  const auto& na = a.node();
  const auto& nb = b.node();
  if (na.prefix_len != nb.prefix_len || na.suffix_len != nb.suffix_len)
    return false;
  if (static_cast<bool>(na.left) != static_cast<bool>(nb.left)) return false;
  if (static_cast<bool>(na.right) != static_cast<bool>(nb.right)) return false;
  if (na.left && !(*na.left == *nb.left)) return false;
  if (na.right && !(*na.right == *nb.right)) return false;
  return true;
}

LcsResult lcs(std::u32string_view a, std::u32string_view b) {
  LcsResult best;
  if (a.empty() || b.empty()) return best;
  // suffix[j]: length of the longest common suffix of a[..i] and b[..j].
  std::vector<std::size_t> suffix(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t prev_diag = 0;  // suffix[j-1] from the previous row
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = suffix[j];
      if (a[i - 1] == b[j - 1]) {
        const std::size_t len = prev_diag + 1;
        suffix[j] = len;
        const std::size_t sa = i - len;
        const std::size_t sb = j - len;
        if (len > best.len ||
            (len == best.len &&
             (sa < best.start_a || (sa == best.start_a && sb < best.start_b)))) {
          best = {sa, sb, len};
        }
      } else {
        suffix[j] = 0;
      }
      prev_diag = up;
    }
  }
  return best;
}

LcsResult lcs(std::string_view a, std::string_view b) {
  return lcs(utf8::decode(a), utf8::decode(b));
}

namespace {

EditTreeRef build_impl(std::u32string_view src, std::u32string_view trg) {
  const LcsResult m = lcs(src, trg);
  if (m.len == 0) {
    return EditTree::make_leaf(utf8::encode(src), utf8::encode(trg));
  }
  const auto src_prefix = src.substr(0, m.start_a);
  const auto trg_prefix = trg.substr(0, m.start_b);
  const auto src_suffix = src.substr(m.start_a + m.len);
  const auto trg_suffix = trg.substr(m.start_b + m.len);
  EditTreeRef left, right;
  if (!src_prefix.empty() || !trg_prefix.empty())
    left = build_impl(src_prefix, trg_prefix);
  if (!src_suffix.empty() || !trg_suffix.empty())
    right = build_impl(src_suffix, trg_suffix);
  return EditTree::make_node(m.start_a, src.size() - m.start_a - m.len,
                             std::move(left), std::move(right));
}

std::optional<std::u32string> apply_impl(const EditTree& tree,
                                         std::u32string_view src) {
  if (tree.is_leaf()) {
    const auto& sub = tree.leaf();
    if (utf8::encode(src) != sub.source) return std::nullopt;
    return utf8::decode(sub.target);
  }
  const auto& n = tree.node();
  if (src.size() < n.prefix_len + n.suffix_len) return std::nullopt;
  const auto prefix = src.substr(0, n.prefix_len);
  const auto middle = src.substr(n.prefix_len, src.size() - n.prefix_len - n.suffix_len);
  const auto suffix = src.substr(src.size() - n.suffix_len);
  std::u32string out;
  if (n.left) {
    auto res = apply_impl(*n.left, prefix);
    if (!res) return std::nullopt;
    out += *res;
  } else if (!prefix.empty()) {
    return std::nullopt;  // an absent child only accepts ""
  }
  out += middle;
  if (n.right) {
    auto res = apply_impl(*n.right, suffix);
    if (!res) return std::nullopt;
    out += *res;
  } else if (!suffix.empty()) {
    return std::nullopt;
  }
  return out;
}

}  // namespace

EditTreeRef build_edit_tree(std::string_view source, std::string_view target) {
  return build_impl(utf8::decode(source), utf8::decode(target));
}

std::optional<std::string> apply_edit_tree(const EditTree& tree,
                                           std::string_view source) {
  auto res = apply_impl(tree, utf8::decode(source));
  if (!res) return std::nullopt;
  return utf8::encode(*res);
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  const std::u32string ua = utf8::decode(a);
  const std::u32string ub = utf8::decode(b);
  std::vector<std::size_t> row(ub.size() + 1);
  for (std::size_t j = 0; j <= ub.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= ua.size(); ++i) {
    std::size_t prev_diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= ub.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t subst = prev_diag + (ua[i - 1] == ub[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, subst});
      prev_diag = up;
    }
  }
  return row[ub.size()];
}

namespace {

void escape_into(std::string_view s, std::string& out) {
  for (char c : s) {
    if (c == '\\' || c == '(' || c == ')' || c == ',') out.push_back('\\');
    out.push_back(c);
  }
}

void key_into(const EditTree& tree, std::string& out) {
  if (tree.is_leaf()) {
    out += "sub(";
    escape_into(tree.leaf().source, out);
    out.push_back(',');
    escape_into(tree.leaf().target, out);
    out.push_back(')');
    return;
  }
  const auto& n = tree.node();
  out += "node(";
  out += std::to_string(n.prefix_len);
  out.push_back(',');
  out += std::to_string(n.suffix_len);
  out.push_back(',');
  if (n.left) key_into(*n.left, out); else out += "ε";
  out.push_back(',');
  if (n.right) key_into(*n.right, out); else out += "ε";
  out.push_back(')');
}

class KeyParser {
 public:
  explicit KeyParser(std::string_view s) : s_(s) {}

  EditTreeRef parse() {
    EditTreeRef t = tree();
    if (pos_ != s_.size()) fail("trailing characters");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("bad edit-tree key at offset " +
                                std::to_string(pos_) + ": " + what);
  }

  bool consume(std::string_view lit) {
    if (s_.substr(pos_, lit.size()) != lit) return false;
    pos_ += lit.size();
    return true;
  }

  EditTreeRef tree() {
    if (consume("sub(")) {
      std::string src = text();
      if (!consume(",")) fail("expected ','");
      std::string trg = text();
      if (!consume(")")) fail("expected ')'");
      return EditTree::make_leaf(std::move(src), std::move(trg));
    }
    if (consume("node(")) {
      const std::size_t prefix_len = number();
      if (!consume(",")) fail("expected ','");
      const std::size_t suffix_len = number();
      if (!consume(",")) fail("expected ','");
      EditTreeRef left = child();
      if (!consume(",")) fail("expected ','");
      EditTreeRef right = child();
      if (!consume(")")) fail("expected ')'");
      return EditTree::make_node(prefix_len, suffix_len, std::move(left),
                                 std::move(right));
    }
    fail("expected 'sub(' or 'node('");
  }

  EditTreeRef child() {
    if (consume("ε")) return nullptr;
    return tree();
  }

  std::size_t number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
    if (pos_ == start) fail("expected a number");
    return std::stoull(std::string(s_.substr(start, pos_ - start)));
  }

  std::string text() {
    std::string out;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == ',' || c == ')') break;
      if (c == '\\') {
        ++pos_;
        if (pos_ >= s_.size()) fail("dangling escape");
      } else if (c == '(') {
        fail("unescaped '('");
      }
      out.push_back(s_[pos_]);
      ++pos_;
    }
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string canonical_key(const EditTree& tree) {
  std::string out;
  key_into(tree, out);
  return out;
}

EditTreeRef parse_key(std::string_view key) { return KeyParser(key).parse(); }

}  // namespace med::edit
