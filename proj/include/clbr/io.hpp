#pragma once

// On-disk formats: tab-separated edge lists, view-delta files, embedding
// TSVs, the training log and metrics CSVs, and the flat key=value files
// used for configs and run manifests. All numeric output is printed with
// 17 significant digits so reruns are byte-identical.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clbr/augment.hpp"
#include "clbr/encoder.hpp"
#include "clbr/eval.hpp"
#include "clbr/graph.hpp"
#include "clbr/trainer.hpp"

namespace clbr {

std::string format_double(double value);

// One `<src>TAB<dst>` pair per line, 0-based local ids, '#' comments.
EdgeList read_edge_list(const std::filesystem::path& path);
void write_edge_list(const std::filesystem::path& path, const EdgeList& edges);

// `<node_type>TAB<local_id>TAB<d_0>...<d_{D-1}>`, node_type in {user,item,bundle}.
void write_embedding_tsv(const std::filesystem::path& path, const Matrix& values,
                         const NodeSpace& space);
Matrix read_embedding_tsv(const std::filesystem::path& path, const NodeSpace& space);

// Lines of `<+|->TAB<relation>TAB<src>TAB<dst>`; header comments record
// the seed, ratios and sampler kind.
void write_view_delta(const std::filesystem::path& path, const ViewDelta& delta,
                      std::uint64_t seed, const AugmentConfig& cfg);
ViewDelta read_view_delta(const std::filesystem::path& path, std::uint64_t* seed_out = nullptr);

void write_train_log_csv(const std::filesystem::path& path, const std::vector<EpochLog>& history);

// `metric,k,value,n_users,seed` rows plus a flat key=value summary.
void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report);
void write_metrics_summary(const std::filesystem::path& path, const MetricsReport& report);

// Flat `key = value` lines grouped by optional `[section]` headers; '#'
// comments. Keys are stored fully qualified as "section.key".
class KeyValueFile {
  public:
    void set(const std::string& key, const std::string& value);
    std::optional<std::string> get(const std::string& key) const;
    const std::map<std::string, std::string>& entries() const { return entries_; }

    static KeyValueFile load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

  private:
    std::map<std::string, std::string> entries_;
};

// FNV-1a over the file bytes, as a fixed-width hex string.
std::string file_checksum(const std::filesystem::path& path);

}  // namespace clbr
