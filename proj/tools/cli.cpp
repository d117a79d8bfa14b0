#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "qsr/loss_io.hpp"
#include "qsr/manifest.hpp"
#include "qsr/parallel.hpp"
#include "qsr/patchmatch.hpp"
#include "qsr/phantom.hpp"
#include "qsr/quality.hpp"
#include "qsr/resample.hpp"
#include "qsr/volume_io.hpp"

namespace qsr::cli {
namespace fs = std::filesystem;

namespace {

/// Thrown for flag combinations CLI11 cannot check by itself.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::uint64_t seed = 1;
    int threads = 0;
    bool verbose = false;
};

void require_distinct(const fs::path& in, const fs::path& out) {
    std::error_code ec;
    if (fs::exists(out) && fs::equivalent(in, out, ec))
        throw UsageError("output path '" + out.string() + "' would overwrite input '" + in.string() + "'");
}

std::string psnr_text(const std::optional<double>& v) { return v ? format_real(*v) : "inf"; }

// --- demo -----------------------------------------------------------------

struct DemoArgs {
    fs::path out;
    std::size_t patients = 4;
    std::size_t slices = 8;
    std::size_t size = 256;
    std::size_t target = 256;
    double perturbation = 0.25;
    DegradeParams degrade;
    bool previews = false;
};

int cmd_demo(const DemoArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
    PhantomSpec spec;
    spec.seed = g.seed;
    spec.patients = a.patients;
    spec.slices_per_patient = a.slices;
    spec.size = a.size;
    auto [first, second] = generate_similar_pair(spec, a.perturbation);

    std::vector<Volume> lr, hr;
    for (const auto& v : first.volumes()) lr.push_back(degrade_volume(preprocess(v, a.target), a.degrade));
    for (const auto& v : second.volumes()) hr.push_back(preprocess(v, a.target));
    const Dataset lr_set(DatasetLabel::LR, std::move(lr)), hr_set(DatasetLabel::HR, std::move(hr));
    save_dataset(lr_set, a.out / "lr");
    save_dataset(hr_set, a.out / "hr");
    if (a.previews) {
        fs::create_directories(a.out / "preview");
        for (const auto* ds : {&lr_set, &hr_set})
            for (const auto& v : ds->volumes())
                write_pgm16(v.slices[v.slices.size() / 2],
                            a.out / "preview" / (std::string(to_string(ds->label())) + "_" + v.patient_id + ".pgm"));
    }
    if (g.verbose) err << "demo: wrote " << lr_set.size() << " LR and " << hr_set.size() << " HR volumes\n";
    out << "lr: " << (a.out / "lr").string() << "\nhr: " << (a.out / "hr").string() << '\n';
    return kOk;
}

// --- preprocess / degrade ---------------------------------------------------

int cmd_preprocess(const fs::path& in, const fs::path& outdir, std::size_t target, const Globals& g,
                   std::ostream& out, std::ostream& err) {
    require_distinct(in, outdir);
    const Dataset ds = load_dataset(in, DatasetLabel::HR);
    std::vector<Volume> result;
    for (const auto& v : ds.volumes()) {
        if (g.verbose) err << "preprocess: " << v.patient_id << '\n';
        result.push_back(preprocess(v, target));
    }
    save_dataset(Dataset(ds.label(), std::move(result)), outdir);
    out << "volumes: " << ds.size() << '\n';
    return kOk;
}

int cmd_degrade(const fs::path& in, const fs::path& outdir, const DegradeParams& p, const Globals& g,
                std::ostream& out, std::ostream& err) {
    require_distinct(in, outdir);
    const Dataset ds = load_dataset(in, DatasetLabel::HR);
    std::vector<Volume> result;
    for (const auto& v : ds.volumes()) {
        if (g.verbose) err << "degrade: " << v.patient_id << '\n';
        result.push_back(degrade_volume(v, p));
    }
    save_dataset(Dataset(DatasetLabel::LR, std::move(result)), outdir);
    out << "volumes: " << ds.size() << '\n';
    return kOk;
}

// --- match ----------------------------------------------------------------

struct MatchArgs {
    fs::path lr, hr, out;
    std::string levels = "hierarchical";
    std::string metric = "nmi";
    MatchConfig cfg;
    bool filter = false;
};

int cmd_match(MatchArgs a, const Globals& g, std::ostream& out, std::ostream& err) {
    a.cfg.levels = match_levels_from_string(a.levels);
    a.cfg.metric = similarity_kind_from_string(a.metric);
    const Dataset lr = load_dataset(a.lr, DatasetLabel::LR);
    const Dataset hr = load_dataset(a.hr, DatasetLabel::HR);
    if (g.verbose)
        err << "match: " << lr.size() << " LR / " << hr.size() << " HR patients, levels "
            << to_string(a.cfg.levels) << ", " << thread_count() << " threads\n";
    Manifest m = match_hierarchical(lr, hr, a.cfg);
    if (a.filter) m = filter_threshold(m, a.cfg.threshold);
    write_manifest(m, a.out);
    double sum = 0;
    for (const auto& r : m.records) sum += r.weight;
    out << "records: " << m.records.size() << '\n';
    out << "mean_weight: "
        << (m.records.empty() ? std::string("nan") : format_real(sum / static_cast<double>(m.records.size())))
        << '\n';
    return kOk;
}

// --- stats ----------------------------------------------------------------

int cmd_stats(const fs::path& manifest, std::size_t bins, fs::path csv, std::ostream& out,
              std::ostream& err) {
    const Manifest m = read_manifest(manifest);
    if (m.records.empty()) {
        err << "error: no records in " << manifest.string() << '\n';
        return kDataError;
    }
    const MatchStats st = weight_stats(m, bins);
    if (csv.empty()) csv = fs::path(manifest.string() + ".hist.csv");
    write_histogram_csv(st, csv);
    out << "records: " << m.records.size() << '\n';
    out << "mean: " << format_real(st.mean) << '\n';
    out << "fraction_0.45_0.55: " << format_real(st.fraction_in(0.45, 0.55)) << '\n';
    out << "histogram: " << csv.string() << '\n';
    return kOk;
}

// --- metrics --------------------------------------------------------------

struct MetricsArgs {
    fs::path reference, estimate;
    std::string mode = "global";
    SsimParams ssim;
    double peak = 0;  // 0 = max of the reference slice
};

int cmd_metrics(MetricsArgs a, std::ostream& out, std::ostream& err) {
    if (a.mode == "global") a.ssim.mode = SsimMode::Global;
    else if (a.mode == "windowed") a.ssim.mode = SsimMode::Windowed;
    else throw UsageError("--mode must be global or windowed");
    a.ssim.validate();

    const Dataset ref = load_dataset(a.reference, DatasetLabel::HR);
    const Dataset est = load_dataset(a.estimate, DatasetLabel::HR);
    const std::optional<double> peak = a.peak > 0 ? std::optional<double>(a.peak) : std::nullopt;

    std::vector<std::string> rows;
    double sum_psnr = 0, sum_ssim = 0, sum_rmse = 0;
    std::size_t n = 0;
    bool any_inf = false;
    for (const auto& rv : ref.volumes()) {
        const Volume* ev = est.find(rv.patient_id);
        if (!ev) {
            err << "error: patient '" << rv.patient_id << "' missing from " << a.estimate.string() << '\n';
            return kDataError;
        }
        if (ev->slices.size() != rv.slices.size()) {
            err << "error: patient '" << rv.patient_id << "' has " << ev->slices.size()
                << " estimate slices, " << rv.slices.size() << " reference slices\n";
            return kDataError;
        }
        for (std::size_t s = 0; s < rv.slices.size(); ++s) {
            if (!rv.slices[s].same_shape(ev->slices[s])) {
                err << "error: dimension mismatch at patient '" << rv.patient_id << "' slice " << s << '\n';
                return kDataError;
            }
            const QualityReport q = evaluate_pair(rv.slices[s], ev->slices[s], a.ssim, peak);
            rows.push_back(rv.patient_id + "," + std::to_string(s) + "," + psnr_text(q.psnr) + "," +
                           format_real(q.ssim) + "," + format_real(q.rmse));
            if (q.psnr) sum_psnr += *q.psnr;
            else any_inf = true;
            sum_ssim += q.ssim;
            sum_rmse += q.rmse;
            ++n;
        }
    }
    if (est.size() != ref.size()) {
        err << "error: estimate set has " << est.size() << " patients, reference set " << ref.size() << '\n';
        return kDataError;
    }
    const double dn = static_cast<double>(n);
    out << "patient,slice,psnr,ssim,rmse\n";
    for (const auto& r : rows) out << r << '\n';
    out << "mean,all," << (any_inf ? std::string("inf") : format_real(sum_psnr / dn)) << ','
        << format_real(sum_ssim / dn) << ',' << format_real(sum_rmse / dn) << '\n';
    return kOk;
}

// --- loss-eval ------------------------------------------------------------

int cmd_loss_eval(const fs::path& dir, const LossWeights& lw, const std::string& adv, std::ostream& out) {
    const AdvKind kind = adv_kind_from_string(adv);
    const LossBatch b = load_loss_batch(dir);
    const LossBreakdown r = total_loss(b, lw, kind);
    out << "# lambda1=" << format_real(lw.lambda1) << " lambda2=" << format_real(lw.lambda2)
        << " lambda3=" << format_real(lw.lambda3) << " adv=" << to_string(kind)
        << " batch=" << b.items.size() << '\n';
    out << "adv,cyc,idt,ql,total\n";
    out << format_real(r.adv) << ',' << format_real(r.cyc) << ',' << format_real(r.idt) << ','
        << format_real(r.ql) << ',' << format_real(r.total) << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quasi-supervised super-resolution dataset builder and reference toolkit", "qsr"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Seed for synthetic data");
    app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_flag("--verbose,-v", g.verbose, "Progress on stderr");

    DemoArgs demo;
    auto* c_demo = app.add_subcommand("demo", "Generate a synthetic LR/HR dataset pair");
    c_demo->add_option("--out", demo.out, "Output directory")->required();
    c_demo->add_option("--patients", demo.patients)->check(CLI::PositiveNumber);
    c_demo->add_option("--slices", demo.slices)->check(CLI::PositiveNumber);
    c_demo->add_option("--size", demo.size, "Phantom size in pixels")->check(CLI::Range(32, 4096));
    c_demo->add_option("--target", demo.target, "Preprocessing size")->check(CLI::PositiveNumber);
    c_demo->add_option("--perturbation", demo.perturbation)->check(CLI::Range(0.0, 1.0));
    c_demo->add_option("--sigma", demo.degrade.sigma)->check(CLI::PositiveNumber);
    c_demo->add_option("--factor", demo.degrade.scale_factor)->check(CLI::PositiveNumber);
    c_demo->add_flag("--previews", demo.previews, "Write 16-bit PGM previews of the middle slice");

    fs::path pre_in, pre_out;
    std::size_t pre_target = 256;
    auto* c_pre = app.add_subcommand("preprocess", "Resize, rotation-correct, recenter, normalise");
    c_pre->add_option("--in", pre_in)->required()->check(CLI::ExistingDirectory);
    c_pre->add_option("--out", pre_out)->required();
    c_pre->add_option("--target", pre_target)->check(CLI::PositiveNumber);

    fs::path deg_in, deg_out;
    DegradeParams deg;
    auto* c_deg = app.add_subcommand("degrade", "Blur, downsample and upsample every slice");
    c_deg->add_option("--in", deg_in)->required()->check(CLI::ExistingDirectory);
    c_deg->add_option("--out", deg_out)->required();
    c_deg->add_option("--sigma", deg.sigma)->check(CLI::PositiveNumber);
    c_deg->add_option("--factor", deg.scale_factor)->check(CLI::PositiveNumber);

    MatchArgs match;
    auto* c_match = app.add_subcommand("match", "Match LR patches to HR patches and write a manifest");
    c_match->add_option("--lr", match.lr)->required()->check(CLI::ExistingDirectory);
    c_match->add_option("--hr", match.hr)->required()->check(CLI::ExistingDirectory);
    c_match->add_option("--out", match.out, "Manifest path")->required();
    c_match->add_option("--levels", match.levels)
        ->check(CLI::IsMember({"hierarchical", "slice-patch", "patch-only", "exhaustive"}));
    c_match->add_option("--metric", match.metric)->check(CLI::IsMember({"nmi", "pcc", "rbf"}));
    c_match->add_option("--patch-size", match.cfg.patch_size)->check(CLI::PositiveNumber);
    c_match->add_option("--stride", match.cfg.stride)->check(CLI::PositiveNumber);
    c_match->add_option("--bins", match.cfg.hist.bins)->check(CLI::Range(2, 65535));
    c_match->add_option("--gamma", match.cfg.rbf.gamma, "RBF gamma (0 = sqrt(N)/2)")->check(CLI::NonNegativeNumber);
    c_match->add_option("--threshold", match.cfg.threshold)->check(CLI::Range(0.0, 1.0));
    c_match->add_flag("--filter", match.filter, "Keep only weights above the threshold");

    fs::path st_manifest, st_csv;
    std::size_t st_bins = 20;
    auto* c_stats = app.add_subcommand("stats", "Weight histogram and summary of a manifest");
    c_stats->add_option("--manifest", st_manifest)->required()->check(CLI::ExistingFile);
    c_stats->add_option("--bins", st_bins)->check(CLI::PositiveNumber);
    c_stats->add_option("--out", st_csv, "Histogram CSV (default <manifest>.hist.csv)");

    MetricsArgs met;
    auto* c_met = app.add_subcommand("metrics", "PSNR, SSIM and RMSE per slice");
    c_met->add_option("--reference", met.reference)->required()->check(CLI::ExistingDirectory);
    c_met->add_option("--estimate", met.estimate)->required()->check(CLI::ExistingDirectory);
    c_met->add_option("--mode", met.mode)->check(CLI::IsMember({"global", "windowed"}));
    c_met->add_option("--window", met.ssim.window)->check(CLI::PositiveNumber);
    c_met->add_option("--k1", met.ssim.k1)->check(CLI::PositiveNumber);
    c_met->add_option("--k2", met.ssim.k2)->check(CLI::PositiveNumber);
    c_met->add_option("--range", met.ssim.dynamic_range, "SSIM dynamic range L")->check(CLI::PositiveNumber);
    c_met->add_option("--peak", met.peak, "PSNR peak (default max of reference)")->check(CLI::NonNegativeNumber);

    fs::path loss_dir;
    LossWeights lw;
    std::string adv = "least-squares";
    auto* c_loss = app.add_subcommand("loss-eval", "Evaluate the loss family on a stored batch");
    c_loss->add_option("--batch", loss_dir)->required()->check(CLI::ExistingDirectory);
    c_loss->add_option("--lambda1", lw.lambda1)->check(CLI::NonNegativeNumber);
    c_loss->add_option("--lambda2", lw.lambda2)->check(CLI::NonNegativeNumber);
    c_loss->add_option("--lambda3", lw.lambda3)->check(CLI::NonNegativeNumber);
    c_loss->add_option("--adv", adv)->check(CLI::IsMember({"least-squares", "ls", "log"}));

    std::vector<const char*> argv{"qsr"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kOk;
        }
        err << "usage error: " << e.what() << "\n\n" << app.help();
        return kUsageError;
    }

    set_thread_count(g.threads);
    try {
        if (c_demo->parsed()) return cmd_demo(demo, g, out, err);
        if (c_pre->parsed()) return cmd_preprocess(pre_in, pre_out, pre_target, g, out, err);
        if (c_deg->parsed()) return cmd_degrade(deg_in, deg_out, deg, g, out, err);
        if (c_match->parsed()) return cmd_match(match, g, out, err);
        if (c_stats->parsed()) return cmd_stats(st_manifest, st_bins, st_csv, out, err);
        if (c_met->parsed()) return cmd_metrics(met, out, err);
        if (c_loss->parsed()) return cmd_loss_eval(loss_dir, lw, adv, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsageError;
}

}  // namespace qsr::cli
