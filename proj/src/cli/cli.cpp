#include "cdbin/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "cdbin/data/synthetic.hpp"
#include "cdbin/eval/bench.hpp"
#include "cdbin/eval/evaluate.hpp"
#include "cdbin/eval/metrics.hpp"
#include "cdbin/gan/infer.hpp"
#include "cdbin/gan/train.hpp"
#include "cdbin/jpeg/codec.hpp"

namespace cdbin::cli {

namespace {

namespace fs = std::filesystem;

void writeText(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

// Deterministic metric line; wall time deliberately goes to stderr only so
// fixed-seed runs produce bit-identical logs.
std::string metricsLine(const gan::StepMetrics& m) {
    char buf[360];
    std::snprintf(buf, sizeof(buf),
                  "{\"step\":%ld,\"l_gen\":%.9g,\"l_global\":%.9g,\"l_local\":%.9g,"
                  "\"l_total\":%.9g,\"l_disc_global\":%.9g,\"l_disc_local\":%.9g}",
                  m.step, m.lossGen, m.lossAdvGlobal, m.lossAdvLocal, m.lossTotal,
                  m.lossDiscGlobal, m.lossDiscLocal);
    return buf;
}

gan::TrainConfig loadTrainConfig(const std::string& configPath) {
    gan::TrainConfig cfg;
    std::string path = configPath;
    if (path.empty())
        if (const char* env = std::getenv("CDBIN_CONFIG")) path = env;
    if (!path.empty()) {
        const auto bytes = readFile(path);
        cfg = gan::trainConfigFromJson(std::string(bytes.begin(), bytes.end()));
    }
    return cfg;
}

struct TrainFlags {
    std::string manifest;
    std::string out;
    std::string config;
    int epochs = -1;
    int batch = -1;
    long maxSteps = 0;
    std::uint64_t seed = 0;
    bool seedSet = false;
    int threads = 0;
};

void applyThreads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

int cmdEncode(const std::string& in, const std::string& out, int quality) {
    const PixelImage img = readPnm(in);
    const jpeg::JpegStream stream = jpeg::encodeImage(img, quality);
    writeFile(out, stream.bytes);
    std::fprintf(stderr, "encoded %dx%d -> %zu bytes (%.2f:1)\n", img.width, img.height,
                 stream.bytes.size(),
                 jpeg::compressionRatio(img.samples.size(), stream.bytes.size()));
    return 0;
}

int cmdDecode(const std::string& in, const std::string& out) {
    const PixelImage img = jpeg::decodeImage(jpeg::JpegStream{readFile(in)});
    writePnm(img, out);
    std::fprintf(stderr, "decoded %dx%d, %d component(s)\n", img.width, img.height,
                 img.components);
    return 0;
}

int cmdCoeffs(const std::string& in, const std::string& out) {
    const auto coeffs = jpeg::partialDecode(jpeg::JpegStream{readFile(in)});
    writeText(out, jpeg::writeCoeffDump(coeffs));
    return 0;
}

struct PrepareFlags {
    std::string docs, gt, out;
    int synthetic = 0;
    int width = 768, height = 512;
    int quality = 50, tile = 256, border = 128;
    double fraction = 0.8;
    std::uint64_t seed = 0;
};

int cmdPrepare(const PrepareFlags& f) {
    fs::path docsDir = f.docs, gtDir = f.gt;
    fs::create_directories(f.out);
    if (f.synthetic > 0) {
        docsDir = fs::path(f.out) / "synthetic" / "docs";
        gtDir = fs::path(f.out) / "synthetic" / "gt";
        data::writeSyntheticCorpus(docsDir, gtDir, f.synthetic, f.width, f.height, f.seed);
    } else if (f.docs.empty() || f.gt.empty()) {
        throw CLI::ValidationError("prepare", "--docs/--gt or --synthetic required");
    }

    data::PrepareOptions opts;
    opts.quality = f.quality;
    opts.tileSize = f.tile;
    opts.border = f.border;
    opts.trainFraction = f.fraction;
    opts.seed = f.seed;
    const auto manifest = data::prepareDataset(docsDir, gtDir, f.out, opts);

    char cfg[256];
    std::snprintf(cfg, sizeof(cfg),
                  "{\"quality\":%d,\"tile_size\":%d,\"border\":%d,\"train_fraction\":%g,"
                  "\"seed\":%llu}\n",
                  f.quality, f.tile, f.border, f.fraction,
                  static_cast<unsigned long long>(f.seed));
    writeText(fs::path(f.out) / "config.json", cfg);

    std::fprintf(stderr, "prepared %zu documents, %zu tiles -> %s\n", manifest.records.size(),
                 manifest.tiles.size(), f.out.c_str());
    return 0;
}

int cmdTrain(const TrainFlags& f) {
    gan::TrainConfig cfg = loadTrainConfig(f.config);
    if (f.epochs >= 0) cfg.epochs = f.epochs;
    if (f.batch > 0) cfg.batchSize = f.batch;
    if (f.seedSet) {
        cfg.seed = f.seed;
        cfg.model.initSeed = f.seed;
    }
    cfg.validate();
    applyThreads(f.threads);

    const fs::path manifestPath = f.manifest;
    const auto manifest = data::loadManifest(manifestPath);
    const auto pairs = data::loadTilePairs(manifest, manifestPath.parent_path(), "train");
    if (pairs.empty()) throw Error("train: no training tiles in manifest");

    std::vector<gan::Sample> samples;
    samples.reserve(pairs.size());
    for (const auto& p : pairs) samples.push_back(gan::makeSample(p));

    fs::create_directories(f.out);
    writeText(fs::path(f.out) / "config.json", gan::trainConfigToJson(cfg) + "\n");

    std::ofstream log(fs::path(f.out) / "metrics.jsonl");
    if (!log) throw Error("cannot write metrics log");

    gan::DdganModel model(cfg.model);
    gan::GanOptimizers opts(model, cfg);

    const auto start = std::chrono::steady_clock::now();
    gan::TrainResult result =
        gan::trainLoop(model, opts, samples, cfg, f.maxSteps, [&](const gan::StepMetrics& m) {
            log << metricsLine(m) << "\n";
            if (m.step % 25 == 0)
                std::fprintf(stderr, "step %ld  focal %.4f  total %.4f\n", m.step, m.lossGen,
                             m.lossTotal);
        });
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    gan::trainingCheckpoint(model, opts).save(fs::path(f.out) / "model.ckpt");
    std::fprintf(stderr, "trained %ld steps over %zu tiles in %.1fs -> %s/model.ckpt\n",
                 result.steps, samples.size(), seconds, f.out.c_str());
    return 0;
}

struct BinarizeFlags {
    std::string in, ckpt, out;
    int border = 0, origWidth = 0, origHeight = 0;
    int threads = 0;
};

int cmdBinarize(const BinarizeFlags& f) {
    applyThreads(f.threads);
    gan::DdganModel model = gan::DdganModel::loadCheckpoint(f.ckpt);
    gan::BinarizeOptions opts;
    opts.border = f.border;
    opts.cropWidth = f.origWidth;
    opts.cropHeight = f.origHeight;
    const PixelImage out = gan::binarizeStream(jpeg::JpegStream{readFile(f.in)}, model, opts);
    writePnm(out, f.out);
    std::fprintf(stderr, "binarized -> %s (%dx%d)\n", f.out.c_str(), out.width, out.height);
    return 0;
}

struct EvalFlags {
    std::string manifest, ckpt, out, split = "test";
    int threads = 0;
};

int cmdEval(const EvalFlags& f) {
    applyThreads(f.threads);
    const fs::path manifestPath = f.manifest;
    const auto manifest = data::loadManifest(manifestPath);
    gan::DdganModel model = gan::DdganModel::loadCheckpoint(f.ckpt);

    const auto report = eval::evaluateCorpus(manifest, manifestPath.parent_path(), f.split,
                                             eval::modelBinarizer(model));
    std::cout << eval::metricReportTable(report);
    if (!f.out.empty()) {
        fs::create_directories(f.out);
        writeText(fs::path(f.out) / "report.jsonl", eval::metricReportJsonl(report));
        writeText(fs::path(f.out) / "config.json",
                  std::string("{\"manifest\":\"") + f.manifest + "\",\"checkpoint\":\"" + f.ckpt +
                      "\",\"split\":\"" + f.split + "\"}\n");
    }
    return 0;
}

struct BenchFlags {
    std::string manifest, out, config;
    int epochs = 1;
    std::uint64_t seed = 0;
    bool seedSet = false;
    int threads = 0;
};

int cmdBench(const BenchFlags& f) {
    gan::TrainConfig cfg = loadTrainConfig(f.config);
    if (f.seedSet) {
        cfg.seed = f.seed;
        cfg.model.initSeed = f.seed;
    }
    applyThreads(f.threads);

    const fs::path manifestPath = f.manifest;
    const auto manifest = data::loadManifest(manifestPath);
    const auto report = eval::benchmark(manifest, manifestPath.parent_path(), cfg, f.epochs);

    std::printf("variant      sec/epoch   img/s   bytes/batch\n");
    for (const auto* v : {&report.compressed, &report.pixel})
        std::printf("%-11s  %9.3f  %6.2f  %12zu\n", v->name.c_str(), v->secondsPerEpoch,
                    v->imagesPerSecond, v->bytesPerBatch);
    std::printf("compressed/raw bytes ratio: %.1fx, speedup: %.2fx\n",
                double(report.pixel.bytesPerBatch) / double(report.compressed.bytesPerBatch),
                report.pixel.secondsPerEpoch / report.compressed.secondsPerEpoch);

    if (!f.out.empty()) {
        fs::create_directories(f.out);
        writeText(fs::path(f.out) / "bench.json", eval::benchmarkReportJson(report) + "\n");
        writeText(fs::path(f.out) / "config.json", gan::trainConfigToJson(cfg) + "\n");
        // two-column plot data: corpus size vs seconds, one file per variant
        char rowC[64], rowP[64];
        std::snprintf(rowC, sizeof(rowC), "%d %.6f\n", report.tileCount,
                      report.compressed.secondsPerEpoch);
        std::snprintf(rowP, sizeof(rowP), "%d %.6f\n", report.tileCount,
                      report.pixel.secondsPerEpoch);
        writeText(fs::path(f.out) / "time_vs_size.compressed.dat", rowC);
        writeText(fs::path(f.out) / "time_vs_size.pixel.dat", rowP);
    }
    return 0;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"compressed-domain document binarization toolkit"};
    app.require_subcommand(1);

    // encode
    std::string encIn, encOut;
    int encQuality = 50;
    auto* encode = app.add_subcommand("encode", "encode a PGM/PPM image as baseline JPEG");
    encode->add_option("input", encIn, "input .pgm/.ppm")->required();
    encode->add_option("--out", encOut, "output .jpg path")->required();
    encode->add_option("--quality", encQuality, "JPEG quality in [1,100]")
        ->check(CLI::Range(1, 100));

    // decode
    std::string decIn, decOut;
    auto* decode = app.add_subcommand("decode", "decode a baseline JPEG to PGM/PPM");
    decode->add_option("input", decIn, "input .jpg")->required();
    decode->add_option("--out", decOut, "output .pgm/.ppm path")->required();

    // coeffs
    std::string coIn, coOut;
    auto* coeffs = app.add_subcommand("coeffs", "partial-decode to a coefficient dump");
    coeffs->add_option("input", coIn, "input .jpg")->required();
    coeffs->add_option("--out", coOut, "output dump path")->required();

    // prepare
    PrepareFlags pf;
    auto* prepare = app.add_subcommand("prepare", "pad, tile, compress, and split a corpus");
    prepare->add_option("--docs", pf.docs, "directory of document PGM/PPM files");
    prepare->add_option("--gt", pf.gt, "directory of ground-truth files (same names)");
    prepare->add_option("--out", pf.out, "output dataset directory")->required();
    prepare->add_option("--synthetic", pf.synthetic, "generate N synthetic documents instead");
    prepare->add_option("--width", pf.width, "synthetic document width");
    prepare->add_option("--height", pf.height, "synthetic document height");
    prepare->add_option("--quality", pf.quality, "tile JPEG quality")->check(CLI::Range(1, 100));
    prepare->add_option("--tile", pf.tile, "tile size");
    prepare->add_option("--border", pf.border, "black border padding");
    prepare->add_option("--train-fraction", pf.fraction, "document-level train fraction");
    prepare->add_option("--seed", pf.seed, "split seed");

    // train
    TrainFlags tf;
    auto* train = app.add_subcommand("train", "train the dual-discriminator model");
    train->add_option("--manifest", tf.manifest, "dataset manifest path")->required();
    train->add_option("--out", tf.out, "run output directory")->required();
    train->add_option("--config", tf.config, "JSON config (flags win; CDBIN_CONFIG as default)");
    train->add_option("--epochs", tf.epochs, "training epochs");
    train->add_option("--batch", tf.batch, "batch size");
    train->add_option("--max-steps", tf.maxSteps, "stop after this many steps (0 = all)");
    auto* seedOpt = train->add_option("--seed", tf.seed, "run seed (training and init)");
    train->add_option("--threads", tf.threads, "cap worker threads (0 = default)");

    // binarize
    BinarizeFlags bf;
    auto* binarize = app.add_subcommand("binarize", "binarize a JPEG document stream");
    binarize->add_option("input", bf.in, "input .jpg")->required();
    binarize->add_option("--ckpt", bf.ckpt, "model checkpoint")->required();
    binarize->add_option("--out", bf.out, "output .pgm path")->required();
    binarize->add_option("--border", bf.border, "crop border pixels added at prepare time");
    binarize->add_option("--orig-width", bf.origWidth, "crop to this pre-padding width");
    binarize->add_option("--orig-height", bf.origHeight, "crop to this pre-padding height");
    binarize->add_option("--threads", bf.threads, "cap worker threads (0 = default)");

    // eval
    EvalFlags ef;
    auto* evalCmd = app.add_subcommand("eval", "evaluate a checkpoint over a manifest split");
    evalCmd->add_option("--manifest", ef.manifest, "dataset manifest path")->required();
    evalCmd->add_option("--ckpt", ef.ckpt, "model checkpoint")->required();
    evalCmd->add_option("--split", ef.split, "split to evaluate (train|test)");
    evalCmd->add_option("--out", ef.out, "report output directory");
    evalCmd->add_option("--threads", ef.threads, "cap worker threads (0 = default)");

    // bench
    BenchFlags bfl;
    auto* bench = app.add_subcommand("bench", "time compressed vs pixel training pipelines");
    bench->add_option("--manifest", bfl.manifest, "dataset manifest path")->required();
    bench->add_option("--out", bfl.out, "report output directory");
    bench->add_option("--config", bfl.config, "JSON config");
    bench->add_option("--epochs", bfl.epochs, "epochs to time");
    auto* benchSeed = bench->add_option("--seed", bfl.seed, "sample-order seed");
    bench->add_option("--threads", bfl.threads, "cap worker threads (0 = default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e); // --help
            return 0;
        }
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (*encode) return cmdEncode(encIn, encOut, encQuality);
        if (*decode) return cmdDecode(decIn, decOut);
        if (*coeffs) return cmdCoeffs(coIn, coOut);
        if (*prepare) return cmdPrepare(pf);
        if (*train) {
            tf.seedSet = seedOpt->count() > 0;
            return cmdTrain(tf);
        }
        if (*binarize) return cmdBinarize(bf);
        if (*evalCmd) return cmdEval(ef);
        if (*bench) {
            bfl.seedSet = benchSeed->count() > 0;
            return cmdBench(bfl);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("cdbin");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace cdbin::cli
