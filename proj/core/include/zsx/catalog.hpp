#pragma once

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "zsx/error.hpp"

namespace zsx {

// Provenance of a descriptor: DSM headers, MADRS headers, MADRS leads, the
// expert lexicon, and the hand-curated elaborations.
enum class Mode { kDH, kMH, kML, kSSTOT, kALL };

using ModeSet = std::set<Mode>;

std::string_view mode_name(Mode mode);
// Throws kUnknownMode for anything other than the exact tags.
Mode parse_mode(std::string_view tag);
// Comma- or '+'-separated list, e.g. "MH+DH" or "DH,MH".
ModeSet parse_modes(std::string_view list);
std::string format_modes(const ModeSet& modes);

struct Label {
  std::string id;
  std::string display_name;

  friend bool operator==(const Label&, const Label&) = default;
};

struct Descriptor {
  std::string text;
  std::string label_id;
  Mode mode;

  friend bool operator==(const Descriptor&, const Descriptor&) = default;
  friend auto operator<=>(const Descriptor&, const Descriptor&) = default;
};

class LabelCatalog {
 public:
  // Validates that every descriptor's label resolves, that (text, label, mode)
  // triples are unique, and that every label has at least one descriptor.
  LabelCatalog(std::vector<Label> labels, std::vector<Descriptor> descriptors);

  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<Descriptor>& descriptors() const { return descriptors_; }

  const Label* find_label(std::string_view id) const;
  bool has_label(std::string_view id) const { return find_label(id) != nullptr; }

  // Label ids in catalog order.
  std::vector<std::string> label_ids() const;
  std::vector<const Descriptor*> descriptors_of(std::string_view label_id) const;

 private:
  std::vector<Label> labels_;
  std::vector<Descriptor> descriptors_;
};

// "disturbed_sleep" -> "Disturbed sleep".
std::string display_name_for(std::string_view label_id);

// TSV rows `label_id<TAB>mode<TAB>descriptor_text`; labels appear in order of
// first mention.
LabelCatalog load_catalog(const std::filesystem::path& path);
LabelCatalog parse_catalog(std::istream& in);

// Keeps descriptors whose mode is in `modes`. Labels left without descriptors
// are dropped and reported through `warnings`. Throws kEmptyCatalog when
// nothing survives and kConfig when `modes` is empty.
LabelCatalog select_mode(const LabelCatalog& catalog, const ModeSet& modes,
                         Warnings* warnings = nullptr);

}  // namespace zsx
