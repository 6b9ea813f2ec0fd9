#include "core/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace dfl {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(std::ifstream& in, const std::string& path) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4))
        raise(ErrorKind::io, "truncated file: " + path);
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_u32_be(std::ofstream& out, std::uint32_t value) {
    unsigned char buf[4] = {static_cast<unsigned char>(value >> 24),
                            static_cast<unsigned char>(value >> 16),
                            static_cast<unsigned char>(value >> 8),
                            static_cast<unsigned char>(value)};
    out.write(reinterpret_cast<char*>(buf), 4);
}

// Shares count items over n buckets: floor for everyone, the remainder going
// to the lowest bucket ids. Deterministic by construction.
std::vector<int> even_shares(int count, int n) {
    std::vector<int> shares(static_cast<std::size_t>(n), count / n);
    for (int i = 0; i < count % n; ++i) shares[static_cast<std::size_t>(i)] += 1;
    return shares;
}

std::vector<std::int32_t> indices_of_class(const LabeledDataset& ds, int cls) {
    std::vector<std::int32_t> result;
    for (int i = 0; i < ds.count(); ++i)
        if (ds.labels[static_cast<std::size_t>(i)] == cls) result.push_back(i);
    return result;
}

} // namespace

std::vector<int> LabeledDataset::class_counts() const {
    std::vector<int> counts(kNumClasses, 0);
    for (std::uint8_t label : labels) counts.at(label) += 1;
    return counts;
}

bool NodeAssignment::is_corrupt(std::int32_t index) const {
    return std::binary_search(corrupt_indices.begin(), corrupt_indices.end(), index);
}

std::string to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::balanced: return "balanced";
        case Scheme::unbalanced: return "unbalanced";
        case Scheme::none: return "none";
    }
    return "none";
}

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path,
                        SourceTag source) {
    std::ifstream images(images_path, std::ios::binary);
    if (!images) raise(ErrorKind::io, "cannot open " + images_path);
    std::ifstream labels(labels_path, std::ios::binary);
    if (!labels) raise(ErrorKind::io, "cannot open " + labels_path);

    const std::uint32_t images_magic = read_u32_be(images, images_path);
    if (images_magic != kImagesMagic)
        raise(ErrorKind::format, "bad image magic number in " + images_path);
    const std::uint32_t image_count = read_u32_be(images, images_path);
    const std::uint32_t rows = read_u32_be(images, images_path);
    const std::uint32_t cols = read_u32_be(images, images_path);
    if (rows != kImageRows || cols != kImageCols)
        raise(ErrorKind::format, "expected 28x28 images in " + images_path + ", got " +
                                     std::to_string(rows) + "x" + std::to_string(cols));

    const std::uint32_t labels_magic = read_u32_be(labels, labels_path);
    if (labels_magic != kLabelsMagic)
        raise(ErrorKind::format, "bad label magic number in " + labels_path);
    const std::uint32_t label_count = read_u32_be(labels, labels_path);
    if (image_count != label_count)
        raise(ErrorKind::consistency, "image/label count mismatch: " + std::to_string(image_count) +
                                          " vs " + std::to_string(label_count));

    LabeledDataset ds;
    ds.source = source;
    std::vector<unsigned char> raw(static_cast<std::size_t>(image_count) * kImagePixels);
    if (!images.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
        raise(ErrorKind::io, "truncated file: " + images_path);
    ds.labels.resize(image_count);
    if (!labels.read(reinterpret_cast<char*>(ds.labels.data()),
                     static_cast<std::streamsize>(ds.labels.size())))
        raise(ErrorKind::io, "truncated file: " + labels_path);
    for (std::uint8_t label : ds.labels)
        if (label >= kNumClasses)
            raise(ErrorKind::format, "label out of range in " + labels_path);

    ds.pixels.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) ds.pixels[i] = raw[i] / 255.0;
    return ds;
}

void write_idx(const LabeledDataset& ds, const std::string& images_path,
               const std::string& labels_path) {
    std::ofstream images(images_path, std::ios::binary);
    if (!images) raise(ErrorKind::io, "cannot open for write: " + images_path);
    write_u32_be(images, kImagesMagic);
    write_u32_be(images, static_cast<std::uint32_t>(ds.count()));
    write_u32_be(images, kImageRows);
    write_u32_be(images, kImageCols);
    std::vector<unsigned char> raw(ds.pixels.size());
    for (std::size_t i = 0; i < ds.pixels.size(); ++i) {
        const double v = std::min(1.0, std::max(0.0, ds.pixels[i]));
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    images.write(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!images) raise(ErrorKind::io, "write failed: " + images_path);

    std::ofstream labels(labels_path, std::ios::binary);
    if (!labels) raise(ErrorKind::io, "cannot open for write: " + labels_path);
    write_u32_be(labels, kLabelsMagic);
    write_u32_be(labels, static_cast<std::uint32_t>(ds.count()));
    labels.write(reinterpret_cast<const char*>(ds.labels.data()),
                 static_cast<std::streamsize>(ds.labels.size()));
    if (!labels) raise(ErrorKind::io, "write failed: " + labels_path);
}

LabeledDataset stratified_subset(const LabeledDataset& ds, double fraction, Rng& rng) {
    if (fraction <= 0.0 || fraction > 1.0)
        raise(ErrorKind::parameter, "subset fraction must be in (0,1], got " + std::to_string(fraction));
    if (fraction == 1.0) return ds;

    std::vector<std::int32_t> kept;
    for (int cls = 0; cls < kNumClasses; ++cls) {
        auto members = indices_of_class(ds, cls);
        rng.shuffle(members);
        const auto keep = static_cast<std::size_t>(
            std::lround(fraction * static_cast<double>(members.size())));
        members.resize(std::min(keep, members.size()));
        kept.insert(kept.end(), members.begin(), members.end());
    }
    std::sort(kept.begin(), kept.end());

    LabeledDataset out;
    out.source = ds.source;
    out.labels.reserve(kept.size());
    out.pixels.reserve(kept.size() * kImagePixels);
    for (std::int32_t index : kept) {
        out.labels.push_back(ds.labels[static_cast<std::size_t>(index)]);
        const auto img = ds.image(index);
        out.pixels.insert(out.pixels.end(), img.begin(), img.end());
    }
    return out;
}

FederatedAssignment assign_iid_nontarget(const LabeledDataset& ds, int n_nodes, int target_class,
                                         Rng& rng) {
    if (n_nodes < 1) raise(ErrorKind::parameter, "need at least one node");
    if (target_class < 0 || target_class >= kNumClasses)
        raise(ErrorKind::parameter, "target class out of range");

    FederatedAssignment assignment;
    assignment.target_class = target_class;
    assignment.per_node.resize(static_cast<std::size_t>(n_nodes));

    for (int cls = 0; cls < kNumClasses; ++cls) {
        if (cls == target_class) continue;
        auto members = indices_of_class(ds, cls);
        rng.shuffle(members);
        const auto shares = even_shares(static_cast<int>(members.size()), n_nodes);
        std::size_t cursor = 0;
        for (int node = 0; node < n_nodes; ++node) {
            auto& dest = assignment.per_node[static_cast<std::size_t>(node)].train_indices;
            dest.insert(dest.end(), members.begin() + static_cast<std::ptrdiff_t>(cursor),
                        members.begin() + static_cast<std::ptrdiff_t>(cursor + shares[node]));
            cursor += static_cast<std::size_t>(shares[node]);
        }
    }
    return assignment;
}

void assign_target_balanced(const LabeledDataset& ds, FederatedAssignment& assignment,
                            const CentralityRanking& ranking, double p, Rng& rng) {
    if (p < 0.0 || p > 1.0) raise(ErrorKind::parameter, "p must be in [0,1], got " + std::to_string(p));
    const int n_nodes = assignment.node_count();
    if (static_cast<int>(ranking.ordered.size()) != n_nodes)
        raise(ErrorKind::parameter, "ranking does not cover all nodes");

    assignment.scheme = Scheme::balanced;
    auto members = indices_of_class(ds, assignment.target_class);
    rng.shuffle(members);
    const auto shares = even_shares(static_cast<int>(members.size()), n_nodes);

    const int corrupt_nodes = static_cast<int>(std::ceil(p * n_nodes));
    std::vector<char> corrupt_rank(static_cast<std::size_t>(n_nodes), 0);
    for (int rank = 0; rank < corrupt_nodes; ++rank)
        corrupt_rank[static_cast<std::size_t>(ranking.ordered[static_cast<std::size_t>(rank)])] = 1;

    std::size_t cursor = 0;
    for (int node = 0; node < n_nodes; ++node) {
        auto& dest = assignment.per_node[static_cast<std::size_t>(node)];
        const auto begin = members.begin() + static_cast<std::ptrdiff_t>(cursor);
        const auto end = begin + shares[node];
        dest.train_indices.insert(dest.train_indices.end(), begin, end);
        if (corrupt_rank[static_cast<std::size_t>(node)])
            dest.corrupt_indices.insert(dest.corrupt_indices.end(), begin, end);
        cursor += static_cast<std::size_t>(shares[node]);
        std::sort(dest.corrupt_indices.begin(), dest.corrupt_indices.end());
    }
}

void assign_target_unbalanced(const LabeledDataset& ds, FederatedAssignment& assignment,
                              const CentralityRanking& ranking, double p, Rng& rng) {
    if (p < 0.0 || p > 1.0) raise(ErrorKind::parameter, "p must be in [0,1], got " + std::to_string(p));
    const int n_nodes = assignment.node_count();
    if (n_nodes < 2) raise(ErrorKind::parameter, "unbalanced scheme needs at least 2 nodes");
    if (static_cast<int>(ranking.ordered.size()) != n_nodes)
        raise(ErrorKind::parameter, "ranking does not cover all nodes");

    assignment.scheme = Scheme::unbalanced;
    auto members = indices_of_class(ds, assignment.target_class);
    rng.shuffle(members);

    const int hub = ranking.ordered[0];
    const int hub_count =
        static_cast<int>(std::ceil(p * static_cast<double>(members.size())));

    auto& hub_dest = assignment.per_node[static_cast<std::size_t>(hub)];
    hub_dest.train_indices.insert(hub_dest.train_indices.end(), members.begin(),
                                  members.begin() + hub_count);
    hub_dest.corrupt_indices.assign(members.begin(), members.begin() + hub_count);
    std::sort(hub_dest.corrupt_indices.begin(), hub_dest.corrupt_indices.end());

    // Remaining nodes split the clean remainder evenly, extras to the lowest
    // node ids (hub excluded, it holds no clean target samples).
    const auto shares = even_shares(static_cast<int>(members.size()) - hub_count, n_nodes - 1);
    std::size_t cursor = static_cast<std::size_t>(hub_count);
    int share_slot = 0;
    for (int node = 0; node < n_nodes; ++node) {
        if (node == hub) continue;
        auto& dest = assignment.per_node[static_cast<std::size_t>(node)];
        const auto begin = members.begin() + static_cast<std::ptrdiff_t>(cursor);
        const auto end = begin + shares[static_cast<std::size_t>(share_slot)];
        dest.train_indices.insert(dest.train_indices.end(), begin, end);
        cursor += static_cast<std::size_t>(shares[static_cast<std::size_t>(share_slot)]);
        share_slot += 1;
    }
}

void split_validation(FederatedAssignment& assignment, const LabeledDataset& ds,
                      double val_fraction, Rng& rng) {
    if (val_fraction <= 0.0 || val_fraction >= 1.0)
        raise(ErrorKind::parameter, "val_fraction must be in (0,1), got " + std::to_string(val_fraction));

    for (auto& node : assignment.per_node) {
        std::vector<std::vector<std::int32_t>> by_class(kNumClasses);
        for (std::int32_t index : node.train_indices)
            by_class[ds.labels[static_cast<std::size_t>(index)]].push_back(index);

        node.train_indices.clear();
        node.val_indices.clear();
        for (auto& members : by_class) {
            if (members.empty()) continue;
            if (members.size() < 2) {
                node.train_indices.insert(node.train_indices.end(), members.begin(), members.end());
                continue;
            }
            rng.shuffle(members);
            const auto val_count = static_cast<std::size_t>(
                std::floor(val_fraction * static_cast<double>(members.size())));
            node.val_indices.insert(node.val_indices.end(), members.begin(),
                                    members.begin() + static_cast<std::ptrdiff_t>(val_count));
            node.train_indices.insert(node.train_indices.end(),
                                      members.begin() + static_cast<std::ptrdiff_t>(val_count),
                                      members.end());
        }
        std::sort(node.train_indices.begin(), node.train_indices.end());
        std::sort(node.val_indices.begin(), node.val_indices.end());
    }
}

std::string assignment_manifest_csv(const FederatedAssignment& assignment) {
    std::ostringstream out;
    out << "node_id,index,split,corrupt_flag\n";
    for (int node = 0; node < assignment.node_count(); ++node) {
        const auto& na = assignment.per_node[static_cast<std::size_t>(node)];
        for (std::int32_t index : na.train_indices)
            out << node << "," << index << ",train," << (na.is_corrupt(index) ? 1 : 0) << "\n";
        for (std::int32_t index : na.val_indices)
            out << node << "," << index << ",val," << (na.is_corrupt(index) ? 1 : 0) << "\n";
    }
    return out.str();
}

} // namespace dfl
