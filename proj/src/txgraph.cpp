#include "holoviz/txgraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <unordered_set>

namespace holoviz::txgraph {

std::string normalize_frame_id(std::string_view name) {
  while (!name.empty() && name.front() == '/') name.remove_prefix(1);
  if (name.empty()) throw InvalidTransform("empty frame id");
  return std::string(name);
}

void FrameTree::insert(const StampedTransform& in) {
  StampedTransform st = in;
  st.parent = normalize_frame_id(st.parent);
  st.child = normalize_frame_id(st.child);
  if (st.parent == st.child) throw InvalidTransform("frame '" + st.child + "' cannot be its own parent");
  if (st.stamp.nanoseconds < 0) throw InvalidTransform("negative stamp on '" + st.child + "'");
  if (!st.transform.finite()) throw InvalidTransform("non-finite transform on '" + st.child + "'");

  std::unique_lock lock(mutex_);
  auto it = edges_.find(st.child);
  const bool reparent = it == edges_.end() || it->second.parent != st.parent;
  if (reparent) {
    // Walk up from the proposed parent; meeting the child means a loop.
    std::string cursor = st.parent;
    for (std::size_t hops = 0; hops <= edges_.size(); ++hops) {
      if (cursor == st.child) {
        ++rejected_;
        throw CycleRejected("inserting " + st.parent + " -> " + st.child + " would create a cycle");
      }
      auto up = edges_.find(cursor);
      if (up == edges_.end()) break;
      cursor = up->second.parent;
    }
    if (it == edges_.end()) {
      it = edges_.emplace(st.child, Edge{}).first;
    } else if (--parent_refs_[it->second.parent] == 0) {
      parent_refs_.erase(it->second.parent);
    }
    it->second.parent = st.parent;
    it->second.samples.clear();
    ++parent_refs_[st.parent];
  }

  auto& samples = it->second.samples;
  auto pos = std::lower_bound(samples.begin(), samples.end(), st.stamp,
                              [](const Sample& s, Stamp t) { return s.stamp < t; });
  if (pos != samples.end() && pos->stamp == st.stamp) {
    pos->transform = st.transform;
  } else {
    samples.insert(pos, Sample{st.stamp, st.transform});
  }

  const Stamp cutoff = Stamp::from_seconds(samples.back().stamp.seconds() - window_);
  auto keep = std::lower_bound(samples.begin(), samples.end(), cutoff,
                               [](const Sample& s, Stamp t) { return s.stamp < t; });
  samples.erase(samples.begin(), keep);
}

Transformd FrameTree::evaluate(const std::string& child, const Edge& edge, Stamp at) const {
  const auto& s = edge.samples;
  const auto too_far = [&](Stamp sample) {
    return std::abs(seconds_between(sample, at)) > kExtrapolationTolerance;
  };
  if (at <= s.front().stamp) {
    if (too_far(s.front().stamp)) {
      throw ExtrapolationTooFar("lookup of '" + child + "' at " + std::to_string(at.seconds()) +
                                " s precedes buffered data");
    }
    return s.front().transform;
  }
  if (at >= s.back().stamp) {
    if (too_far(s.back().stamp)) {
      throw ExtrapolationTooFar("lookup of '" + child + "' at " + std::to_string(at.seconds()) +
                                " s is past buffered data");
    }
    return s.back().transform;
  }
  auto hi = std::lower_bound(s.begin(), s.end(), at, [](const Sample& a, Stamp t) { return a.stamp < t; });
  if (hi->stamp == at) return hi->transform;
  auto lo = hi - 1;
  const double u = seconds_between(lo->stamp, at) / seconds_between(lo->stamp, hi->stamp);
  return geom::interpolate(lo->transform, hi->transform, u);
}

bool FrameTree::is_known(const std::string& frame) const {
  return edges_.count(frame) > 0 || parent_refs_.count(frame) > 0;
}

std::vector<std::string> FrameTree::chain_to_root(const std::string& frame) const {
  std::vector<std::string> chain{frame};
  for (auto it = edges_.find(frame); it != edges_.end(); it = edges_.find(it->second.parent)) {
    chain.push_back(it->second.parent);
  }
  return chain;
}

Transformd FrameTree::lookup(std::string_view target_in, std::string_view source_in, std::optional<Stamp> at) const {
  const std::string target = normalize_frame_id(target_in);
  const std::string source = normalize_frame_id(source_in);
  std::shared_lock lock(mutex_);
  if (!is_known(target)) throw UnknownFrame("unknown frame '" + target + "'");
  if (!is_known(source)) throw UnknownFrame("unknown frame '" + source + "'");
  if (target == source) return Transformd::identity();

  const auto up_source = chain_to_root(source);
  const auto up_target = chain_to_root(target);
  if (up_source.back() != up_target.back()) {
    throw Disconnected("frames '" + target + "' and '" + source + "' share no common ancestor");
  }
  // Strip the shared tail; what remains on each side are the edges below the
  // lowest common ancestor.
  std::size_t ns = up_source.size();
  std::size_t nt = up_target.size();
  while (ns > 1 && nt > 1 && up_source[ns - 2] == up_target[nt - 2]) {
    --ns;
    --nt;
  }
  // Children on the path: up_source[0 .. ns-2], up_target[0 .. nt-2].
  std::vector<const std::string*> path;
  for (std::size_t i = 0; i + 1 < ns; ++i) path.push_back(&up_source[i]);
  for (std::size_t i = 0; i + 1 < nt; ++i) path.push_back(&up_target[i]);

  Stamp when;
  if (at) {
    when = *at;
  } else {
    when = Stamp{std::numeric_limits<std::int64_t>::max()};
    for (const auto* child : path) when = std::min(when, edges_.at(*child).samples.back().stamp);
  }

  // ancestor <- source
  Transformd ancestor_from_source;
  for (std::size_t i = ns - 1; i-- > 0;) {
    ancestor_from_source = ancestor_from_source * evaluate(up_source[i], edges_.at(up_source[i]), when);
  }
  Transformd ancestor_from_target;
  for (std::size_t i = nt - 1; i-- > 0;) {
    ancestor_from_target = ancestor_from_target * evaluate(up_target[i], edges_.at(up_target[i]), when);
  }
  return geom::invert(ancestor_from_target) * ancestor_from_source;
}

std::vector<FrameInfo> FrameTree::frames() const {
  std::shared_lock lock(mutex_);
  std::vector<FrameInfo> out;
  out.reserve(edges_.size());
  for (const auto& [child, edge] : edges_) {
    out.push_back(FrameInfo{child, edge.parent, edge.samples.back().stamp});
  }
  std::sort(out.begin(), out.end(), [](const FrameInfo& a, const FrameInfo& b) { return a.frame < b.frame; });
  return out;
}

std::vector<std::string> FrameTree::all_frames() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [child, edge] : edges_) out.push_back(child);
  for (const auto& [parent, refs] : parent_refs_) {
    if (!edges_.count(parent)) out.push_back(parent);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool FrameTree::known(std::string_view frame) const {
  std::shared_lock lock(mutex_);
  return is_known(std::string(frame));
}

std::size_t FrameTree::buffered(std::string_view child) const {
  std::shared_lock lock(mutex_);
  auto it = edges_.find(std::string(child));
  return it == edges_.end() ? 0 : it->second.samples.size();
}

std::optional<std::pair<Stamp, Stamp>> FrameTree::buffered_span(std::string_view child) const {
  std::shared_lock lock(mutex_);
  auto it = edges_.find(std::string(child));
  if (it == edges_.end()) return std::nullopt;
  return std::make_pair(it->second.samples.front().stamp, it->second.samples.back().stamp);
}

bool FrameTree::acyclic() const {
  std::shared_lock lock(mutex_);
  for (const auto& [start, edge] : edges_) {
    std::unordered_set<std::string> seen{start};
    for (auto it = edges_.find(edge.parent); it != edges_.end(); it = edges_.find(it->second.parent)) {
      if (!seen.insert(it->first).second) return false;
    }
  }
  return true;
}

void FrameTree::clear() {
  std::unique_lock lock(mutex_);
  edges_.clear();
  parent_refs_.clear();
}

}  // namespace holoviz::txgraph
