#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "cdbin/data/dataset.hpp"

namespace cdbin::data {

namespace {

using nlohmann::json;

json toJson(const DocumentRecord& r) {
    return json{{"id", r.id},
                {"source", r.sourcePath},
                {"ground_truth", r.gtPath},
                {"orig_width", r.origWidth},
                {"orig_height", r.origHeight},
                {"padded_width", r.paddedWidth},
                {"padded_height", r.paddedHeight},
                {"split", r.split}};
}

DocumentRecord recordFromJson(const json& j) {
    DocumentRecord r;
    r.id = j.at("id").get<std::string>();
    r.sourcePath = j.at("source").get<std::string>();
    r.gtPath = j.at("ground_truth").get<std::string>();
    r.origWidth = j.at("orig_width").get<int>();
    r.origHeight = j.at("orig_height").get<int>();
    r.paddedWidth = j.at("padded_width").get<int>();
    r.paddedHeight = j.at("padded_height").get<int>();
    r.split = j.at("split").get<std::string>();
    return r;
}

} // namespace

void writeManifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    json j;
    j["format"] = "cdbin-dataset";
    j["version"] = manifest.version;
    j["quality"] = manifest.quality;
    j["tile_size"] = manifest.tileSize;
    j["border"] = manifest.border;
    j["seed"] = manifest.seed;
    j["documents"] = json::array();
    for (const auto& r : manifest.records) j["documents"].push_back(toJson(r));
    j["tiles"] = json::array();
    for (const auto& t : manifest.tiles)
        j["tiles"].push_back(json{{"doc", t.docId},
                                  {"row", t.row},
                                  {"col", t.col},
                                  {"jpg", t.jpgPath},
                                  {"gt", t.gtPath}});

    std::ofstream out(path);
    if (!out) throw ManifestError("cannot write manifest: " + path.string());
    out << j.dump(2) << "\n";
}

DatasetManifest loadManifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ManifestError("cannot open manifest: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ManifestError("malformed manifest " + path.string() + ": " + e.what());
    }

    DatasetManifest m;
    try {
        if (j.at("format").get<std::string>() != "cdbin-dataset")
            throw ManifestError("not a dataset manifest: " + path.string());
        m.version = j.at("version").get<int>();
        if (m.version != 1)
            throw ManifestError("unsupported manifest version " + std::to_string(m.version));
        m.quality = j.at("quality").get<int>();
        m.tileSize = j.at("tile_size").get<int>();
        m.border = j.at("border").get<int>();
        m.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& rj : j.at("documents")) m.records.push_back(recordFromJson(rj));
        for (const auto& tj : j.at("tiles"))
            m.tiles.push_back(TileRef{tj.at("doc").get<std::string>(), tj.at("row").get<int>(),
                                      tj.at("col").get<int>(), tj.at("jpg").get<std::string>(),
                                      tj.at("gt").get<std::string>()});
    } catch (const json::exception& e) {
        throw ManifestError("malformed manifest " + path.string() + ": " + e.what());
    }

    // Referential integrity: every tile must name a known record and exist on disk.
    const auto dir = path.parent_path();
    for (const TileRef& t : m.tiles) {
        const bool known = std::any_of(m.records.begin(), m.records.end(),
                                       [&](const DocumentRecord& r) { return r.id == t.docId; });
        if (!known)
            throw ManifestError("tile references unknown document '" + t.docId + "'");
        if (!std::filesystem::exists(dir / t.jpgPath))
            throw ManifestError("missing tile file: " + (dir / t.jpgPath).string());
        if (!std::filesystem::exists(dir / t.gtPath))
            throw ManifestError("missing ground-truth file: " + (dir / t.gtPath).string());
    }
    return m;
}

DatasetManifest prepareDataset(const std::filesystem::path& docsDir,
                               const std::filesystem::path& gtDir,
                               const std::filesystem::path& outDir, const PrepareOptions& opts) {
    std::vector<std::filesystem::path> docFiles;
    for (const auto& entry : std::filesystem::directory_iterator(docsDir))
        if (entry.is_regular_file()) docFiles.push_back(entry.path());
    std::sort(docFiles.begin(), docFiles.end());
    if (docFiles.empty()) throw Error("prepareDataset: no documents in " + docsDir.string());

    DatasetManifest manifest;
    manifest.quality = opts.quality;
    manifest.tileSize = opts.tileSize;
    manifest.border = opts.border;

    struct Loaded {
        PixelImage doc, gt;
    };
    std::vector<Loaded> images;
    for (const auto& docPath : docFiles) {
        const auto gtPath = gtDir / docPath.filename();
        if (!std::filesystem::exists(gtPath))
            throw Error("prepareDataset: missing ground truth for " + docPath.filename().string());
        Loaded l{readPnm(docPath), readPnm(gtPath)};
        if (l.doc.width != l.gt.width || l.doc.height != l.gt.height)
            throw Error("prepareDataset: dimension mismatch for " + docPath.filename().string());

        DocumentRecord r;
        r.id = docPath.stem().string();
        r.sourcePath = docPath.string();
        r.gtPath = gtPath.string();
        r.origWidth = l.doc.width;
        r.origHeight = l.doc.height;
        const PadInfo info = padImage(l.doc, opts.border, opts.tileSize).info;
        r.paddedWidth = info.paddedWidth;
        r.paddedHeight = info.paddedHeight;
        manifest.records.push_back(std::move(r));
        images.push_back(std::move(l));
    }

    splitTrainTest(manifest, opts.trainFraction, opts.seed);

    std::filesystem::create_directories(outDir);
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        DocumentRecord& r = manifest.records[i];
        const auto tileDir = outDir / r.split / r.id;
        std::filesystem::create_directories(tileDir);
        for (TilePair& p : buildPairs(images[i].doc, images[i].gt, r.id, opts.quality,
                                      opts.border, opts.tileSize)) {
            const std::string base = std::to_string(p.row) + "_" + std::to_string(p.col);
            const auto rel = std::filesystem::path(r.split) / r.id / base;
            writeFile(outDir / (rel.string() + ".jpg"), p.stream.bytes);
            writeFile(outDir / (rel.string() + ".gt"), encodePnm(p.groundTruth));
            manifest.tiles.push_back(
                TileRef{r.id, p.row, p.col, rel.string() + ".jpg", rel.string() + ".gt"});
        }
    }

    writeManifest(manifest, outDir / "manifest.json");
    return manifest;
}

std::vector<TilePair> loadTilePairs(const DatasetManifest& manifest,
                                    const std::filesystem::path& manifestDir,
                                    const std::string& split) {
    std::vector<TilePair> pairs;
    for (const TileRef& t : manifest.tiles) {
        const auto rec = std::find_if(manifest.records.begin(), manifest.records.end(),
                                      [&](const DocumentRecord& r) { return r.id == t.docId; });
        if (rec == manifest.records.end())
            throw ManifestError("tile references unknown document '" + t.docId + "'");
        if (rec->split != split) continue;
        TilePair p;
        p.docId = t.docId;
        p.row = t.row;
        p.col = t.col;
        p.stream.bytes = readFile(manifestDir / t.jpgPath);
        p.groundTruth = decodePnm(readFile(manifestDir / t.gtPath));
        pairs.push_back(std::move(p));
    }
    return pairs;
}

} // namespace cdbin::data
