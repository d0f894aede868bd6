#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "diaconf/errors.hpp"

namespace diaconf {

// One conversation's input files. Paths are stored as written in the
// manifest; resolve_path() interprets relative ones against the manifest's
// own directory.
struct ManifestEntry {
  std::string id;
  std::string embeddings;
  std::string hypothesis;  // optional
  std::string reference;   // optional
};

class CorpusManifest {
 public:
  CorpusManifest() = default;

  explicit CorpusManifest(std::vector<ManifestEntry> conversations,
                          std::filesystem::path base_dir = {})
      : conversations_(std::move(conversations)), base_dir_(std::move(base_dir)) {
    std::set<std::string> ids;
    for (const ManifestEntry& e : conversations_)
      if (!ids.insert(e.id).second)
        throw Error("manifest: duplicate conversation id '" + e.id + "'");
  }

  static CorpusManifest load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest: " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error("manifest " + path.string() + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("conversations") ||
        !j["conversations"].is_array())
      throw Error("manifest " + path.string() +
                  ": expected object with a 'conversations' array");
    std::vector<ManifestEntry> entries;
    for (const auto& c : j["conversations"]) {
      ManifestEntry e;
      e.id = c.value("id", "");
      e.embeddings = c.value("embeddings", "");
      e.hypothesis = c.value("hypothesis", "");
      e.reference = c.value("reference", "");
      if (e.id.empty())
        throw Error("manifest " + path.string() + ": conversation without id");
      entries.push_back(std::move(e));
    }
    return CorpusManifest(std::move(entries), path.parent_path());
  }

  void save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["conversations"] = nlohmann::json::array();
    for (const ManifestEntry& e : conversations_) {
      nlohmann::json c;
      c["id"] = e.id;
      c["embeddings"] = e.embeddings;
      if (!e.hypothesis.empty()) c["hypothesis"] = e.hypothesis;
      if (!e.reference.empty()) c["reference"] = e.reference;
      j["conversations"].push_back(std::move(c));
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write manifest: " + path.string());
    out << j.dump(2) << '\n';
  }

  const std::vector<ManifestEntry>& conversations() const { return conversations_; }

  std::filesystem::path resolve_path(const std::string& p) const {
    std::filesystem::path fp(p);
    if (fp.is_absolute() || base_dir_.empty()) return fp;
    return base_dir_ / fp;
  }

 private:
  std::vector<ManifestEntry> conversations_;
  std::filesystem::path base_dir_;
};

}  // namespace diaconf
