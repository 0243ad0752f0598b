#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "socratic/retrieval.hpp"
#include "socratic/smeb.hpp"

namespace socratic {

namespace fs = std::filesystem;
using nlohmann::json;

IndexAlgo index_algo_from_name(const std::string& name) {
    if (name == "exact") return IndexAlgo::exact;
    if (name == "lsh") return IndexAlgo::lsh;
    if (name == "mem") return IndexAlgo::mem;
    if (name == "rft") return IndexAlgo::rft;
    throw ConfigError("unknown index algo: " + name);
}

const char* index_algo_name(IndexAlgo algo) {
    switch (algo) {
        case IndexAlgo::exact: return "exact";
        case IndexAlgo::lsh: return "lsh";
        case IndexAlgo::mem: return "mem";
        case IndexAlgo::rft: return "rft";
    }
    return "?";
}

IndexBundle build_index(KeyMatrix keys, const IndexBuildParams& params) {
    IndexBundle bundle;
    bundle.algo = params.algo;
    bundle.seed = params.seed;
    switch (params.algo) {
        case IndexAlgo::exact:
            bundle.keys = std::move(keys);
            break;
        case IndexAlgo::lsh:
            bundle.lsh = SrpLshIndex::build(std::move(keys), params.lsh, params.seed);
            break;
        case IndexAlgo::mem: {
            auto map = std::make_shared<RandomFeatureMap>(
                params.feature_count, static_cast<int>(keys.dim()), params.seed);
            bundle.memory = memory_store(keys, std::move(map));
            break;
        }
        case IndexAlgo::rft: {
            auto map = std::make_shared<RandomFeatureMap>(
                params.feature_count, static_cast<int>(keys.dim()), params.seed);
            bundle.tree = RandomFeatureTree::build(keys, std::move(map));
            break;
        }
    }
    return bundle;
}

void save_index(const IndexBundle& bundle, const std::string& dir) {
    fs::path tmp = dir + ".tmp";
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    json meta{{"algo", index_algo_name(bundle.algo)}, {"seed", bundle.seed}};
    switch (bundle.algo) {
        case IndexAlgo::exact: {
            const KeyMatrix& keys = bundle.keys.value();
            meta["dim"] = keys.dim();
            meta["count"] = keys.count();
            meta["params"] = json::object();
            smeb_write((tmp / "keys.smeb").string(), keys.rows,
                       keys.ids ? &*keys.ids : nullptr);
            break;
        }
        case IndexAlgo::lsh: {
            const SrpLshIndex& lsh = bundle.lsh.value();
            meta["dim"] = lsh.keys().dim();
            meta["count"] = lsh.keys().count();
            meta["params"] = {{"tables", lsh.params().tables},
                              {"bits", lsh.params().bits},
                              {"probe_radius", lsh.params().probe_radius},
                              {"augmented", lsh.augmented()},
                              {"max_norm", lsh.max_norm()}};
            smeb_write((tmp / "keys.smeb").string(), lsh.keys().rows,
                       lsh.keys().ids ? &*lsh.keys().ids : nullptr);
            smeb_write((tmp / "projections.smeb").string(), lsh.projections());
            break;
        }
        case IndexAlgo::mem: {
            const CompressedMemory& mem = bundle.memory.value();
            meta["dim"] = mem.feature_map->dim();
            meta["count"] = mem.pattern_count;
            meta["params"] = {{"m", mem.feature_map->m()}};
            smeb_write((tmp / "w.smeb").string(), mem.feature_map->weights());
            smeb_write((tmp / "summary.smeb").string(), mem.summary.transpose());
            break;
        }
        case IndexAlgo::rft: {
            const RandomFeatureTree& tree = bundle.tree.value();
            meta["dim"] = tree.map().dim();
            meta["count"] = tree.leaf_count();
            meta["params"] = {{"m", tree.map().m()}};
            smeb_write((tmp / "w.smeb").string(), tree.map().weights());
            smeb_write((tmp / "features.smeb").string(), tree.leaf_features());
            break;
        }
    }
    {
        std::ofstream os(tmp / "meta.json", std::ios::trunc);
        os << meta.dump(2) << "\n";
        if (!os) throw InputError("failed to write index meta in " + tmp.string());
    }
    fs::remove_all(dir);
    fs::rename(tmp, dir);
}

IndexBundle load_index(const std::string& dir) {
    fs::path root(dir);
    std::ifstream is(root / "meta.json");
    if (!is) throw InputError("index directory has no meta.json: " + dir);
    json meta = json::parse(is, nullptr, false);
    if (meta.is_discarded()) throw InputError("index meta.json is not valid JSON: " + dir);

    IndexBundle bundle;
    bundle.algo = index_algo_from_name(meta.at("algo").get<std::string>());
    bundle.seed = meta.at("seed").get<std::uint64_t>();

    auto load_keys = [&]() {
        SmebFile f = smeb_read((root / "keys.smeb").string());
        return KeyMatrix::from_rows(std::move(f.rows), std::move(f.ids));
    };

    switch (bundle.algo) {
        case IndexAlgo::exact:
            bundle.keys = load_keys();
            break;
        case IndexAlgo::lsh: {
            const json& p = meta.at("params");
            SrpLshParams params;
            params.tables = p.at("tables").get<int>();
            params.bits = p.at("bits").get<int>();
            params.probe_radius = p.at("probe_radius").get<int>();
            SmebFile proj = smeb_read((root / "projections.smeb").string());
            bundle.lsh = SrpLshIndex::from_parts(load_keys(), params, bundle.seed,
                                                 std::move(proj.rows),
                                                 p.at("augmented").get<bool>(),
                                                 p.at("max_norm").get<float>());
            break;
        }
        case IndexAlgo::mem: {
            SmebFile w = smeb_read((root / "w.smeb").string());
            SmebFile s = smeb_read((root / "summary.smeb").string());
            CompressedMemory mem;
            mem.feature_map = std::make_shared<RandomFeatureMap>(
                RandomFeatureMap::from_weights(std::move(w.rows), bundle.seed));
            mem.summary = s.rows.row(0).transpose();
            mem.pattern_count = meta.at("count").get<std::size_t>();
            bundle.memory = std::move(mem);
            break;
        }
        case IndexAlgo::rft: {
            SmebFile w = smeb_read((root / "w.smeb").string());
            SmebFile f = smeb_read((root / "features.smeb").string());
            auto map = std::make_shared<RandomFeatureMap>(
                RandomFeatureMap::from_weights(std::move(w.rows), bundle.seed));
            bundle.tree = RandomFeatureTree::from_features(std::move(f.rows), std::move(map));
            break;
        }
    }
    return bundle;
}

}  // namespace socratic
