#include "zsx/catalog.hpp"

#include <fstream>
#include <istream>
#include <tuple>
#include <unordered_set>

#include <fmt/format.h>

namespace zsx {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kDH: return "DH";
    case Mode::kMH: return "MH";
    case Mode::kML: return "ML";
    case Mode::kSSTOT: return "SSTOT";
    case Mode::kALL: return "ALL";
  }
  return "?";
}

Mode parse_mode(std::string_view tag) {
  for (Mode m : {Mode::kDH, Mode::kMH, Mode::kML, Mode::kSSTOT, Mode::kALL}) {
    if (tag == mode_name(m)) return m;
  }
  throw Error(ErrorCode::kUnknownMode, fmt::format("unknown mode tag '{}'", tag));
}

ModeSet parse_modes(std::string_view list) {
  ModeSet modes;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto end = list.find_first_of(",+", start);
    const auto piece = trim(list.substr(start, end == std::string_view::npos
                                                   ? std::string_view::npos
                                                   : end - start));
    if (!piece.empty()) modes.insert(parse_mode(piece));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return modes;
}

std::string format_modes(const ModeSet& modes) {
  std::string out;
  for (Mode m : modes) {
    if (!out.empty()) out += '+';
    out += mode_name(m);
  }
  return out;
}

std::string display_name_for(std::string_view label_id) {
  std::string out(label_id);
  for (char& c : out) {
    if (c == '_') c = ' ';
  }
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') {
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
  }
  return out;
}

LabelCatalog::LabelCatalog(std::vector<Label> labels, std::vector<Descriptor> descriptors)
    : labels_(std::move(labels)), descriptors_(std::move(descriptors)) {
  std::unordered_set<std::string> ids;
  for (const auto& label : labels_) {
    if (label.id.empty()) throw Error(ErrorCode::kParse, "empty label id");
    if (!ids.insert(label.id).second) {
      throw Error(ErrorCode::kDuplicate, fmt::format("duplicate label id '{}'", label.id));
    }
  }
  std::set<std::tuple<std::string, std::string, Mode>> seen;
  std::unordered_set<std::string> covered;
  for (const auto& d : descriptors_) {
    if (d.text.empty()) {
      throw Error(ErrorCode::kParse, fmt::format("empty descriptor for label '{}'", d.label_id));
    }
    if (!ids.contains(d.label_id)) {
      throw Error(ErrorCode::kDanglingReference,
                  fmt::format("descriptor '{}' refers to unknown label '{}'", d.text, d.label_id));
    }
    if (!seen.emplace(d.text, d.label_id, d.mode).second) {
      throw Error(ErrorCode::kDuplicate,
                  fmt::format("duplicate descriptor ({}, {}, {})", d.label_id, mode_name(d.mode),
                              d.text));
    }
    covered.insert(d.label_id);
  }
  for (const auto& label : labels_) {
    if (!covered.contains(label.id)) {
      throw Error(ErrorCode::kEmptyCatalog,
                  fmt::format("label '{}' has no descriptors", label.id));
    }
  }
}

const Label* LabelCatalog::find_label(std::string_view id) const {
  for (const auto& label : labels_) {
    if (label.id == id) return &label;
  }
  return nullptr;
}

std::vector<std::string> LabelCatalog::label_ids() const {
  std::vector<std::string> ids;
  ids.reserve(labels_.size());
  for (const auto& label : labels_) ids.push_back(label.id);
  return ids;
}

std::vector<const Descriptor*> LabelCatalog::descriptors_of(std::string_view label_id) const {
  std::vector<const Descriptor*> out;
  for (const auto& d : descriptors_) {
    if (d.label_id == label_id) out.push_back(&d);
  }
  return out;
}

LabelCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open catalog '{}'", path.string()));
  return parse_catalog(in);
}

LabelCatalog parse_catalog(std::istream& in) {
  std::vector<Label> labels;
  std::unordered_set<std::string> known;
  std::vector<Descriptor> descriptors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw Error(ErrorCode::kParse,
                  fmt::format("catalog line {}: expected label_id<TAB>mode<TAB>descriptor", line_no));
    }
    auto label_id = trim(std::string_view(line).substr(0, tab1));
    const auto mode_tag = trim(std::string_view(line).substr(tab1 + 1, tab2 - tab1 - 1));
    auto text = trim(std::string_view(line).substr(tab2 + 1));
    if (label_id.empty() || text.empty()) {
      throw Error(ErrorCode::kParse, fmt::format("catalog line {}: empty field", line_no));
    }
    Mode mode;
    try {
      mode = parse_mode(mode_tag);
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("catalog line {}: {}", line_no, e.what()));
    }
    if (known.insert(label_id).second) labels.push_back({label_id, display_name_for(label_id)});
    descriptors.push_back({std::move(text), std::move(label_id), mode});
  }
  if (descriptors.empty()) throw Error(ErrorCode::kEmptyCatalog, "catalog has no descriptors");
  return LabelCatalog(std::move(labels), std::move(descriptors));
}

LabelCatalog select_mode(const LabelCatalog& catalog, const ModeSet& modes, Warnings* warnings) {
  if (modes.empty()) throw Error(ErrorCode::kConfig, "mode selection is empty");
  std::vector<Descriptor> kept;
  std::unordered_set<std::string> covered;
  for (const auto& d : catalog.descriptors()) {
    if (modes.contains(d.mode)) {
      kept.push_back(d);
      covered.insert(d.label_id);
    }
  }
  std::vector<Label> labels;
  for (const auto& label : catalog.labels()) {
    if (covered.contains(label.id)) {
      labels.push_back(label);
    } else {
      warn(warnings, fmt::format("label '{}' has no descriptors in modes {}; dropped", label.id,
                                 format_modes(modes)));
    }
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kEmptyCatalog,
                fmt::format("no descriptors in modes {}", format_modes(modes)));
  }
  return LabelCatalog(std::move(labels), std::move(kept));
}

}  // namespace zsx
