#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace med::edit {

class EditTree;
using EditTreeRef = std::shared_ptr<const EditTree>;

// Recursive string transformation built around the longest common substring:
// an interior node copies the common part and delegates the surrounding
// prefix/suffix pairs to its children; a leaf substitutes one string for
// another. Children are absent exactly when the corresponding pair was
// ("",""). All lengths count Unicode codepoints of the source string.
class EditTree {
 public:
  struct Substitution {
    std::string source;
    std::string target;
  };
  struct Interior {
    std::size_t prefix_len = 0;
    std::size_t suffix_len = 0;
    EditTreeRef left;
    EditTreeRef right;
  };

  static EditTreeRef make_leaf(std::string source, std::string target);
  static EditTreeRef make_node(std::size_t prefix_len, std::size_t suffix_len,
                               EditTreeRef left, EditTreeRef right);

  bool is_leaf() const { return std::holds_alternative<Substitution>(repr_); }
  const Substitution& leaf() const { return std::get<Substitution>(repr_); }
  const Interior& node() const { return std::get<Interior>(repr_); }

 private:
  explicit EditTree(Substitution s) : repr_(std::move(s)) {}
  explicit EditTree(Interior n) : repr_(std::move(n)) {}
  std::variant<Substitution, Interior> repr_;
};

bool operator==(const EditTree& a, const EditTree& b);

struct LcsResult {
  std::size_t start_a = 0;
  std::size_t start_b = 0;
  std::size_t len = 0;
};

// Longest common (contiguous) substring. Ties break to the smallest start_a,
// then the smallest start_b; no common character gives (0,0,0).
LcsResult lcs(std::u32string_view a, std::u32string_view b);
LcsResult lcs(std::string_view a, std::string_view b);

EditTreeRef build_edit_tree(std::string_view source, std::string_view target);

// Replays a tree on a (possibly different) source string. Returns nullopt
// when the tree does not apply: a leaf whose source does not match exactly,
// or an interior node on a string shorter than prefix_len + suffix_len.
std::optional<std::string> apply_edit_tree(const EditTree& tree,
                                           std::string_view source);

// Unit-cost edit distance over codepoints.
std::size_t levenshtein(std::string_view a, std::string_view b);

// Injective textual form, e.g. "node(4,1,node(0,2,ε,sub(ge,)),sub(t,en))".
// Absent children render as ε; backslash escapes '(', ')', ',' and '\' in
// leaf strings. This is the on-disk representation inside store files.
std::string canonical_key(const EditTree& tree);
EditTreeRef parse_key(std::string_view key);

}  // namespace med::edit
