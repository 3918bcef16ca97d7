#include "cobweb/serialize.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cobweb {

using nlohmann::json;

namespace {

bool is_context_id_valued(Variant v) {
  // Context values are concept ids for the leaf and path variants and plain
  // words for the word variant.
  return v == Variant::leaf || v == Variant::path;
}

std::string value_key(const ConceptTree& t, AttrId attr, ValueId v) {
  if (attr == kContextAttr && is_context_id_valued(t.variant())) return std::to_string(v);
  return t.words().name(v);
}

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::schema, "tree schema violation at " + where + ": " + what);
}

const json& expect(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) schema_error(where, std::string("missing field '") + key + "'");
  return *it;
}

}  // namespace

struct TreeSerializer {
  static std::string dump(const ConceptTree& t) {
    json doc;
    doc["meta"] = {{"variant", variant_name(t.variant())},
                   {"rng-seed", t.seed()},
                   {"instances-seen", t.instances_seen()}};
    doc["root"] = t.empty() ? json(nullptr) : json(t.root());

    json nodes = json::array();
    for (NodeId id : t.node_ids_sorted()) {
      const ConceptNode& n = t.node(id);
      json jn;
      jn["id"] = id;
      jn["parent"] = n.parent == kNoNode ? json(nullptr) : json(n.parent);
      jn["tally"] = n.tally;
      json counts = json::object();
      json norms = json::object();
      for (const auto& [attr, table] : n.attrs) {
        if (table.counts.empty()) continue;
        json values = json::object();
        for (const auto& [v, c] : table.counts) values[value_key(t, attr, v)] = c;
        counts[t.attributes().name(attr)] = std::move(values);
        if (table.norm != table.total) norms[t.attributes().name(attr)] = table.norm;
      }
      jn["counts"] = std::move(counts);
      if (!norms.empty()) jn["norms"] = std::move(norms);
      nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);

    if (t.variant() == Variant::path) {
      json reg = json::object();
      std::vector<NodeId> keys;
      for (const auto& [v, owners] : t.backrefs()) keys.push_back(v);
      std::sort(keys.begin(), keys.end());
      for (NodeId v : keys) {
        const auto& owners = t.backrefs().at(v);
        std::vector<NodeId> sorted(owners.begin(), owners.end());
        std::sort(sorted.begin(), sorted.end());
        reg[std::to_string(v)] = sorted;
      }
      doc["registry"] = std::move(reg);
    }
    return doc.dump(2) + "\n";
  }

  static ConceptTree load(const std::string& text) {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::schema,
                  std::string("invalid JSON at byte ") + std::to_string(e.byte) + ": " + e.what());
    }
    if (!doc.is_object()) schema_error("$", "document must be an object");

    const json& meta = expect(doc, "meta", "$");
    const json& jvariant = expect(meta, "variant", "meta");
    if (!jvariant.is_string()) schema_error("meta.variant", "must be a string");
    auto variant = variant_from_name(jvariant.get<std::string>());
    if (!variant)
      schema_error("meta.variant", "unknown variant '" + jvariant.get<std::string>() + "'");
    const json& jseed = expect(meta, "rng-seed", "meta");
    if (!jseed.is_number()) schema_error("meta.rng-seed", "must be a number");
    const json& jseen = expect(meta, "instances-seen", "meta");
    if (!jseen.is_number()) schema_error("meta.instances-seen", "must be a number");

    ConceptTree t(*variant, jseed.get<std::uint64_t>());
    t.instances_seen_ = jseen.get<double>();

    const json& jnodes = expect(doc, "nodes", "$");
    if (!jnodes.is_array()) schema_error("nodes", "must be an array");
    const bool id_context = is_context_id_valued(*variant);

    NodeId max_id = 0;
    std::size_t idx = 0;
    for (const json& jn : jnodes) {
      std::string where = "nodes[" + std::to_string(idx++) + "]";
      if (!jn.is_object()) schema_error(where, "must be an object");
      const json& jid = expect(jn, "id", where);
      if (!jid.is_number_unsigned()) schema_error(where + ".id", "must be a non-negative integer");
      NodeId id = jid.get<NodeId>();
      if (t.nodes_.count(id)) schema_error(where + ".id", "duplicate node id");
      auto up = std::make_unique<ConceptNode>();
      up->id = id;
      const json& jparent = expect(jn, "parent", where);
      if (jparent.is_null())
        up->parent = kNoNode;
      else if (jparent.is_number_unsigned())
        up->parent = jparent.get<NodeId>();
      else
        schema_error(where + ".parent", "must be null or a node id");
      const json& jtally = expect(jn, "tally", where);
      if (!jtally.is_number()) schema_error(where + ".tally", "must be a number");
      up->tally = jtally.get<double>();

      const json& jcounts = expect(jn, "counts", where);
      if (!jcounts.is_object()) schema_error(where + ".counts", "must be an object");
      for (auto it = jcounts.begin(); it != jcounts.end(); ++it) {
        AttrId attr = t.attrs_.intern(it.key());
        if (!it.value().is_object())
          schema_error(where + ".counts." + it.key(), "must be an object");
        ValueTable& table = up->get_or_create(attr);
        for (auto vt = it.value().begin(); vt != it.value().end(); ++vt) {
          if (!vt.value().is_number())
            schema_error(where + ".counts." + it.key() + "." + vt.key(), "count must be a number");
          double c = vt.value().get<double>();
          if (!(c > 0.0))
            schema_error(where + ".counts." + it.key() + "." + vt.key(),
                         "count must be positive");
          ValueId v;
          if (attr == kContextAttr && id_context) {
            try {
              v = static_cast<ValueId>(std::stoul(vt.key()));
            } catch (...) {
              schema_error(where + ".counts.context." + vt.key(), "must be a concept id");
            }
          } else {
            v = t.words_.intern(vt.key());
          }
          if (table.add(v, c) <= 0)
            schema_error(where + ".counts." + it.key() + "." + vt.key(), "duplicate value");
        }
        table.norm = table.total;
      }
      if (auto jnorms = jn.find("norms"); jnorms != jn.end()) {
        if (!jnorms->is_object()) schema_error(where + ".norms", "must be an object");
        for (auto it = jnorms->begin(); it != jnorms->end(); ++it) {
          if (!it.value().is_number()) schema_error(where + ".norms." + it.key(), "must be a number");
          auto aid = t.attrs_.lookup(it.key());
          if (!aid) schema_error(where + ".norms." + it.key(), "norm for unknown attribute");
          up->get_or_create(*aid).norm = it.value().get<double>();
        }
      }
      max_id = std::max(max_id, id);
      t.nodes_.emplace(id, std::move(up));
    }
    t.next_id_ = t.nodes_.empty() ? 0 : max_id + 1;

    const json& jroot = expect(doc, "root", "$");
    if (jroot.is_null()) {
      if (!t.nodes_.empty()) schema_error("root", "null root but nodes present");
      t.root_ = kNoNode;
    } else if (jroot.is_number_unsigned()) {
      t.root_ = jroot.get<NodeId>();
      if (!t.nodes_.count(t.root_)) schema_error("root", "root id not among nodes");
    } else {
      schema_error("root", "must be null or a node id");
    }

    // Children are derived from parent links, in id order.
    for (NodeId id : t.node_ids_sorted()) {
      ConceptNode& n = *t.nodes_.at(id);
      if (n.parent == kNoNode) {
        if (id != t.root_) schema_error("nodes", "node " + std::to_string(id) + " has no parent");
        continue;
      }
      auto pit = t.nodes_.find(n.parent);
      if (pit == t.nodes_.end())
        schema_error("nodes", "node " + std::to_string(id) + " has unknown parent");
      pit->second->children.push_back(id);
    }

    // Rebuild the back-reference registry from the tables, then check the
    // serialized copy agrees with it.
    if (*variant == Variant::path) {
      for (const auto& [id, up] : t.nodes_) {
        const ValueTable* ctx = up->find(kContextAttr);
        if (!ctx) continue;
        for (const auto& [v, c] : ctx->counts) t.backrefs_[v].insert(id);
      }
      const json& jreg = expect(doc, "registry", "$");
      if (!jreg.is_object()) schema_error("registry", "must be an object");
      std::size_t entries = 0;
      for (auto it = jreg.begin(); it != jreg.end(); ++it) {
        NodeId v;
        try {
          v = static_cast<ValueId>(std::stoul(it.key()));
        } catch (...) {
          schema_error("registry." + it.key(), "must be a concept id");
        }
        if (!it.value().is_array()) schema_error("registry." + it.key(), "must be an array");
        auto found = t.backrefs_.find(v);
        if (found == t.backrefs_.end() || found->second.size() != it.value().size())
          schema_error("registry." + it.key(), "does not invert the context tables");
        for (const json& owner : it.value()) {
          if (!owner.is_number_unsigned() || !found->second.count(owner.get<NodeId>()))
            schema_error("registry." + it.key(), "does not invert the context tables");
        }
        ++entries;
      }
      if (entries != t.backrefs_.size())
        schema_error("registry", "does not invert the context tables");
    }

    try {
      t.audit();
    } catch (const Error& e) {
      throw Error(ErrorKind::schema, std::string("tree fails invariants on import: ") + e.what());
    }
    return t;
  }
};

std::string ConceptTree::export_json() const { return TreeSerializer::dump(*this); }

std::string export_tree(const ConceptTree& tree) { return TreeSerializer::dump(tree); }

void export_tree_file(const ConceptTree& tree, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open for writing: " + path);
  out << TreeSerializer::dump(tree);
  if (!out) throw Error(ErrorKind::io, "write failed: " + path);
}

ConceptTree import_tree(const std::string& json_text) { return TreeSerializer::load(json_text); }

ConceptTree import_tree_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return TreeSerializer::load(ss.str());
}

}  // namespace cobweb
