#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

#include "pls/forward.hpp"
#include "pls/hio.hpp"
#include "pls/io.hpp"
#include "pls/metrics.hpp"
#include "pls/noise_sim.hpp"
#include "pls/prior.hpp"
#include "pls/protocol.hpp"
#include "pls/sampler.hpp"
#include "pls/schedule.hpp"

namespace pls::cli {

namespace fs = std::filesystem;

namespace {

// ---- key groups -------------------------------------------------------

std::vector<KeySpec> common_keys() {
    return {
        {"seed", "", "random seed (falls back to CVL_SEED, then 0)"},
        {"out", "out", "output directory", KeyKind::path},
        {"jobs", "1", "worker threads for ensembles"},
        {"png", "true", "write 8-bit PNG previews"},
    };
}

std::vector<KeySpec> noise_keys() {
    return {
        {"fwc", "10000", "full well capacity in electrons"},
        {"sigma0", "", "measurement noise level; overrides fwc = 1/sigma0^2"},
    };
}

std::vector<KeySpec> sampler_keys(const std::string& init) {
    return {
        {"measurements", "", "measurement stack (array container)", KeyKind::path, true},
        {"truth", "", "ground truth for metrics", KeyKind::path},
        {"prior", "zero", "zero | discrete:<path> | external:<command or host:port>", KeyKind::spec},
        {"prior_weights", "", "comma-separated atom weights (default uniform)"},
        {"prior_convention", "quarter", "complex prior smoothing: quarter | full"},
        {"levels", "1000", "number of annealing levels T"},
        {"schedule", "geometric", "geometric | linear"},
        {"sigma1_ratio", "0.9", "sigma_1 / sigma_0"},
        {"sigmaT_ratio", "0.01", "sigma_T / sigma_0"},
        {"eps", "auto", "step scale; auto scales with sigma_T^2"},
        {"steps_per_level", "1", "Langevin updates per level"},
        {"clamp_floor", "1e-4", "lower clamp of the real iterate"},
        {"n_runs", "50", "independent sampler runs"},
        {"init", init, "initialization", KeyKind::spec},
        {"init_noise_scale", "1", "noise added to the HIO start, in units of sigma_1"},
        {"trajectory", "false", "dump every level of run 0 under trajectory/"},
    };
}

std::vector<KeySpec> hio_keys() {
    return {
        {"hio_restarts", "50", "HIO random restarts"},
        {"hio_iters", "600", "HIO iterations per restart"},
        {"hio_beta", "0.9", "HIO feedback parameter"},
        {"hio_nonneg", "false", "treat the object as real and non-negative"},
    };
}

std::vector<KeySpec> join(std::initializer_list<std::vector<KeySpec>> groups) {
    std::vector<KeySpec> out;
    for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
    return out;
}

// ---- loading ----------------------------------------------------------

bool is_png(const std::string& path) {
    std::string ext = fs::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png";
}

io::ArrayStack load_any(const std::string& path) {
    if (!fs::exists(path)) throw IoError("no such file: '" + path + "'");
    if (is_png(path)) {
        io::ArrayStack s;
        s.real.push_back(io::read_png(path));
        return s;
    }
    return io::load(path);
}

NoiseParams noise_params(const Settings& s, int bits = 0) {
    if (s.has("sigma0")) return NoiseParams::from_sigma0(s.real("sigma0"), bits);
    return NoiseParams(s.real("fwc"), bits);
}

std::vector<PupilMask> load_pupils(const std::string& path) {
    std::vector<PupilMask> pupils;
    for (auto& m : io::load_real(path)) pupils.push_back(PupilMask::from_mask(std::move(m)));
    return pupils;
}

ForwardModel ptychography_model(const Settings& s, std::size_t h, std::size_t w) {
    if (s.has("pupils")) return PtychographyModel{load_pupils(s.str("pupils")), s.real("rho")};
    return make_ptychography(h, w, s.count("leds"), s.real("led_spacing"), s.real("pupil_radius"), s.real("rho"));
}

SigmaSchedule schedule_for(const Settings& s, double sigma0, double step_scale) {
    const std::size_t levels = s.count("levels");
    const double sigma_t = s.real("sigmaT_ratio") * sigma0;
    const double eps = s.str("eps") == "auto" ? scaled_eps(sigma_t, step_scale) : s.real("eps");
    return make_schedule(sigma0, s.real("sigma1_ratio") * sigma0, sigma_t, levels,
                         parse_schedule_kind(s.str("schedule")), eps);
}

ComplexNoiseConvention convention(const Settings& s) {
    const std::string& c = s.str("prior_convention");
    if (c == "quarter") return ComplexNoiseConvention::quarter;
    if (c == "full") return ComplexNoiseConvention::full;
    throw ConfigError("prior_convention must be quarter or full, got '" + c + "'");
}

ScoreProvider load_prior(const Settings& s, bool complex) {
    auto [kind, arg] = split_spec(s.str("prior"));
    if (kind == "zero" && arg.empty()) return ZeroPrior{};
    if (kind == "external" && !arg.empty()) return ExternalPrior{protocol::ScoreClient::open(arg)};
    if (kind == "discrete" && !arg.empty()) {
        if (complex) {
            return DiscreteComplexPrior{io::load_complex(arg), s.reals("prior_weights"), convention(s)};
        }
        return DiscreteRealPrior{io::load_real(arg), s.reals("prior_weights")};
    }
    throw ConfigError("prior must be zero, discrete:<path> or external:<endpoint>, got '" + s.str("prior") + "'");
}

// ---- output -----------------------------------------------------------

class Output {
public:
    explicit Output(const Settings& s) : dir_(s.str("out")), png_(s.flag("png")) { fs::create_directories(dir_); }

    fs::path path(const std::string& name) const { return dir_ / name; }

    void real(const std::string& key, const std::string& name, const std::vector<RealImage>& images) {
        io::save_real(path(name), images);
        files_[key] = name;
    }
    void complex(const std::string& key, const std::string& name, const std::vector<ComplexImage>& images) {
        io::save_complex(path(name), images);
        files_[key] = name;
    }
    void preview(const std::string& name, const RealImage& img, double lo, double hi) {
        if (!png_) return;
        io::write_png(path(name), img, lo, hi);
        files_[fs::path(name).stem().string() + "_png"] = name;
    }
    void preview_auto(const std::string& name, const RealImage& img) {
        const double hi = *std::max_element(img.begin(), img.end());
        preview(name, img, 0.0, hi > 0.0 ? hi : 1.0);
    }
    void text(const std::string& key, const std::string& name, const std::string& body) {
        std::ofstream f(path(name), std::ios::trunc);
        if (!f) throw IoError("cannot write '" + path(name).string() + "'");
        f << body;
        files_[key] = name;
    }
    const Json& files() const noexcept { return files_; }

private:
    fs::path dir_;
    bool png_;
    Json files_ = Json::object();
};

std::string exact(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// ---- metrics ----------------------------------------------------------

Json real_metrics(const RealImage& est, const RealImage& truth, double peak = 1.0) {
    require_same_shape(est, truth, "metrics");
    Json m = Json::object();
    m["psnr"] = psnr(est, truth, peak);
    if (est.height() >= 11 && est.width() >= 11) m["ssim"] = ssim(est, truth);
    return m;
}

Json complex_metrics(const ComplexImage& est, const ComplexImage& truth, double peak = 1.0) {
    Json m = real_metrics(amplitude(est), amplitude(truth), peak);
    m["phase_psnr"] = phase_psnr(phase(est), phase(truth));
    return m;
}

// ---- sampler plumbing -------------------------------------------------

template <typename Image>
struct RunOutcome {
    Image estimate;
    std::vector<Image> samples;
    std::optional<Ensemble<Image>> ensemble;
    SamplerTrace<Image> trace;
};

// Run 0 carries the trace; the ensemble's streams (seed, k) make a single
// run and run 0 of an ensemble identical.
template <typename Image>
RunOutcome<Image> run_sampler(const Settings& s, const SamplerConfig& cfg,
                              const std::function<Image(const SamplerConfig&, RngStream&, SamplerTrace<Image>*)>& one) {
    RunOutcome<Image> r;
    SamplerConfig first = cfg;
    first.record_trajectory = s.flag("trajectory");
    auto run = [&](RngStream& rng) {
        if (rng.stream_id() == 0) return one(first, rng, &r.trace);
        return one(cfg, rng, nullptr);
    };
    const std::size_t n = s.count("n_runs");
    if (n == 0) throw ConfigError("n_runs must be at least 1");
    if (n == 1) {
        RngStream rng(s.seed(), 0);
        r.estimate = run(rng);
        r.samples = {r.estimate};
        return r;
    }
    if constexpr (std::is_same_v<Image, RealImage>) {
        r.ensemble = ensemble_real(s.seed(), run, n, s.count("jobs"));
    } else {
        r.ensemble = ensemble_complex(s.seed(), run, n, s.count("jobs"));
    }
    r.samples = r.ensemble->samples;
    r.estimate = r.samples.front();
    return r;
}

template <typename Image>
Json diagnostics(const SamplerTrace<Image>& t) {
    Json d = Json::object();
    d["clamped"] = t.clamped;
    if (!t.update_norms.empty()) {
        d["first_update_norm"] = t.update_norms.front();
        d["last_update_norm"] = t.update_norms.back();
    }
    if (t.hio_residual) d["hio_residual"] = *t.hio_residual;
    return d;
}

template <typename Image>
void dump_trajectory(Output& out, const SamplerTrace<Image>& t) {
    if (t.trajectory.empty()) return;
    fs::create_directories(out.path("trajectory"));
    for (std::size_t k = 0; k < t.trajectory.size(); ++k) {
        char name[40];
        std::snprintf(name, sizeof name, "trajectory/level_%05zu.cvl", k + 1);
        if constexpr (std::is_same_v<Image, RealImage>) {
            io::save_real(out.path(name), {t.trajectory[k]});
        } else {
            io::save_complex(out.path(name), {t.trajectory[k]});
        }
    }
}

void write_real_results(Output& out, const RunOutcome<RealImage>& r) {
    out.real("estimate", "estimate.cvl", {r.estimate});
    out.preview("estimate.png", r.estimate, 0.0, 1.0);
    if (r.ensemble) {
        out.real("samples", "samples.cvl", r.samples);
        out.real("mean", "mean.cvl", {r.ensemble->mean});
        out.real("variance", "variance.cvl", {r.ensemble->variance});
        out.preview("mean.png", r.ensemble->mean, 0.0, 1.0);
        out.preview_auto("variance.png", r.ensemble->variance);
    }
    dump_trajectory(out, r.trace);
}

void write_complex_results(Output& out, const RunOutcome<ComplexImage>& r) {
    out.complex("estimate", "estimate.cvl", {r.estimate});
    out.preview_auto("amplitude.png", amplitude(r.estimate));
    out.preview("phase.png", phase(r.estimate), -std::numbers::pi, std::numbers::pi);
    if (r.ensemble) {
        out.complex("samples", "samples.cvl", r.samples);
        out.real("mean", "mean.cvl", {r.ensemble->mean});
        out.real("variance", "variance.cvl", {r.ensemble->variance});
        out.real("phase_mean", "phase_mean.cvl", {*r.ensemble->phase_mean});
        out.real("phase_variance", "phase_variance.cvl", {*r.ensemble->phase_variance});
        out.preview_auto("variance.png", r.ensemble->variance);
        out.preview_auto("phase_variance.png", *r.ensemble->phase_variance);
    }
    dump_trajectory(out, r.trace);
}

SamplerConfig sampler_config(const Settings& s, SigmaSchedule schedule) {
    SamplerConfig cfg(std::move(schedule));
    cfg.steps_per_level = s.count("steps_per_level");
    cfg.clamp_floor = s.real("clamp_floor");
    return cfg;
}

HioConfig hio_config(const Settings& s) {
    HioConfig h;
    h.beta = s.real("hio_beta");
    h.iters = s.count("hio_iters");
    h.restarts = s.count("hio_restarts");
    h.real_nonneg = s.flag("hio_nonneg");
    return h;
}

Json manifest_sections(const Output& out, Json metrics, Json diag) {
    Json j = Json::object();
    j["outputs"] = out.files();
    if (!metrics.is_null()) j["metrics"] = std::move(metrics);
    j["diagnostics"] = std::move(diag);
    return j;
}

// ---- commands ---------------------------------------------------------

Json cmd_simulate(const Settings& s, std::ostream&, std::ostream&) {
    const io::ArrayStack input = load_any(s.str("input"));
    const NoiseParams noise = noise_params(s, static_cast<int>(s.count("quant_bits")));
    const std::string& kind = s.str("model");
    RngStream rng(s.seed(), 0);
    Output out(s);

    std::vector<RealImage> images;
    double rho = 1.0;
    std::size_t h = 0, w = 0;
    if (kind == "identity" && input.dtype != io::DType::f32_complex) {
        // real object: y = N(x), the denoising setting
        images.push_back(simulate_measurement(input.real.front(), noise, rng));
        h = images.front().height(), w = images.front().width();
    } else {
        const ComplexImage object = input.dtype == io::DType::f32_complex ? input.complex.front()
                                                                          : to_complex(input.real.front());
        h = object.height(), w = object.width();
        ForwardModel model;
        if (kind == "identity") {
            model = IdentityModel{};
        } else if (kind == "fourier") {
            model = FourierMagnitudeModel{s.count("pad_factor"), s.real("rho")};
        } else if (kind == "ptychography") {
            model = ptychography_model(s, h, w);
            std::vector<RealImage> masks;
            for (const auto& p : std::get<PtychographyModel>(model.variant()).pupils) masks.push_back(p.mask);
            out.real("pupils", "pupils.cvl", masks);
        } else {
            throw ConfigError("model must be identity, fourier or ptychography, got '" + kind + "'");
        }
        rho = model.rho();
        images = simulate_intensity_measurements(object, model, noise, rng).images;
    }
    out.real("measurements", "measurements.cvl", images);
    out.preview("measurement.png", images.front(), 0.0, 1.0);

    std::ostringstream conf;
    conf << "# measurement settings for downstream commands\n"
         << "model = " << kind << "\npad_factor = " << s.str("pad_factor") << "\nrho = " << s.str("rho")
         << "\nleds = " << s.str("leds") << "\nled_spacing = " << s.str("led_spacing")
         << "\npupil_radius = " << s.str("pupil_radius") << "\nfwc = " << exact(noise.fwc()) << "\n";
    // relative paths in a config file resolve against its directory
    if (kind == "ptychography") conf << "pupils = pupils.cvl\n";
    out.text("model_config", "model.conf", conf.str());

    Json j = manifest_sections(out, nullptr, Json::object());
    j["measurement"] = {{"model", kind},         {"sigma0", noise.sigma0()},  {"fwc", noise.fwc()},
                        {"m", images.size()},    {"rho", rho},                {"bits", noise.quant_bits()},
                        {"object_height", h},    {"object_width", w},         {"height", images.front().height()},
                        {"width", images.front().width()}};
    return j;
}

Json cmd_denoise(const Settings& s, std::ostream&, std::ostream&) {
    const auto stack = io::load_real(s.str("measurements"));
    if (stack.size() != 1) throw ConfigError("denoise expects a single measurement image");
    const RealImage& y = stack.front();
    const NoiseParams noise = noise_params(s);
    const ScoreProvider prior = load_prior(s, false);
    SamplerConfig cfg = sampler_config(s, schedule_for(s, noise.sigma0(), kRealStepScale));
    auto [kind, arg] = split_spec(s.str("init"));
    if (kind == "provided") {
        cfg.init = InitProvided{io::load_real(arg).front()};
    } else if (kind != "measurement") {
        throw ConfigError("denoise init must be measurement or provided:<path>");
    }

    Output out(s);
    const auto r = run_sampler<RealImage>(
        s, cfg, [&](const SamplerConfig& c, RngStream& rng, SamplerTrace<RealImage>* t) {
            return run_real(y, prior, c, rng, t);
        });
    write_real_results(out, r);

    Json metrics = nullptr;
    if (s.has("truth")) {
        const RealImage truth = load_any(s.str("truth")).real.at(0);
        metrics = Json::object();
        metrics["input"] = real_metrics(y, truth);
        metrics["estimate"] = real_metrics(r.estimate, truth);
        if (r.ensemble) metrics["mean"] = real_metrics(r.ensemble->mean, truth);
    }
    return manifest_sections(out, std::move(metrics), diagnostics(r.trace));
}

ComplexImage truth_complex(const Settings& s) {
    const io::ArrayStack t = load_any(s.str("truth"));
    return t.dtype == io::DType::f32_complex ? t.complex.front() : to_complex(t.real.front());
}

Json complex_sampler_command(const Settings& s, const ForwardModel& model, std::vector<RealImage> images,
                             std::size_t h, std::size_t w) {
    const NoiseParams noise = noise_params(s);
    const MeasurementStack stack(std::move(images), noise, model.rho());
    const ScoreProvider prior = load_prior(s, true);
    SamplerConfig cfg = sampler_config(s, schedule_for(s, noise.sigma0(), kComplexStepScale));

    Json diag_extra = Json::object();
    std::optional<ComplexImage> reference;  // alignment target for Fourier ensembles
    auto [kind, arg] = split_spec(s.str("init"));
    if (kind == "hio") {
        RngStream hio_rng = RngStream(s.seed()).substream(kHioStream);
        auto solved = std::make_shared<const HioResult>(hio_initializer(stack, model, hio_config(s), hio_rng));
        reference = crop(solved->best, h, w);
        diag_extra["hio_residual"] = solved->residual;
        diag_extra["hio_best_restart"] = solved->best_restart;
        cfg.init = InitNoisyHio{s.real("init_noise_scale"), hio_config(s), solved};
    } else if (kind == "adjoint") {
        cfg.init = InitAdjoint{};
    } else if (kind == "measurement") {
        cfg.init = InitFromMeasurement{};
    } else if (kind == "provided") {
        ComplexImage o = io::load_complex(arg).front();
        if (o.height() != h || o.width() != w) throw DimensionError("provided initialization has the wrong shape");
        reference = o;
        cfg.init = InitProvided{std::move(o)};
    } else {
        throw ConfigError("unknown init '" + s.str("init") + "'");
    }
    if (model.is_fourier() && !reference) {
        RngStream unused(s.seed());
        reference = init_state(cfg, stack, model, unused).image;
    }

    Output out(s);
    // Fourier samples carry their own shift / flip / phase; aligning each to
    // the deterministic start makes per-pixel statistics meaningful.
    const bool align = model.is_fourier();
    const auto r = run_sampler<ComplexImage>(
        s, cfg, [&](const SamplerConfig& c, RngStream& rng, SamplerTrace<ComplexImage>* t) {
            ComplexImage o = run_complex(stack, model, prior, c, rng, t);
            return align ? align_ambiguities(o, *reference).aligned : o;
        });
    write_complex_results(out, r);

    Json metrics = nullptr;
    if (s.has("truth")) {
        const ComplexImage truth = truth_complex(s);
        require_same_shape(truth, r.estimate, "truth");
        metrics = Json::object();
        ComplexImage est = r.estimate;
        if (align) {
            const Alignment a = align_ambiguities(est, truth);
            est = a.aligned;
            metrics["correlation"] = a.correlation;
        }
        metrics["estimate"] = complex_metrics(est, truth);
        if (r.ensemble) metrics["mean_amplitude"] = real_metrics(r.ensemble->mean, amplitude(truth));
    }
    Json diag = diagnostics(r.trace);
    for (auto& [k, v] : diag_extra.items()) diag[k] = v;
    return manifest_sections(out, std::move(metrics), std::move(diag));
}

Json cmd_phase_retrieval(const Settings& s, std::ostream&, std::ostream&) {
    auto images = io::load_real(s.str("measurements"));
    if (images.size() != 1) throw ConfigError("phase-retrieval expects a single Fourier intensity image");
    const std::size_t pad = s.count("pad_factor");
    if (pad == 0 || images.front().height() % pad || images.front().width() % pad) {
        throw DimensionError("measurement shape is not a multiple of pad_factor");
    }
    const ForwardModel model(FourierMagnitudeModel{pad, s.real("rho")});
    const std::size_t h = images.front().height() / pad, w = images.front().width() / pad;
    return complex_sampler_command(s, model, std::move(images), h, w);
}

Json cmd_ptychography(const Settings& s, std::ostream&, std::ostream&) {
    auto images = io::load_real(s.str("measurements"));
    const std::size_t h = images.front().height(), w = images.front().width();
    const ForwardModel model = ptychography_model(s, h, w);
    if (model.measurement_count() != images.size()) {
        throw DimensionError("stack holds " + std::to_string(images.size()) + " images but the model has " +
                             std::to_string(model.measurement_count()) + " pupils");
    }
    return complex_sampler_command(s, model, std::move(images), h, w);
}

Json cmd_hio(const Settings& s, std::ostream&, std::ostream&) {
    auto images = io::load_real(s.str("measurements"));
    const std::size_t pad = s.count("pad_factor");
    if (pad == 0 || images.front().height() % pad || images.front().width() % pad) {
        throw DimensionError("measurement shape is not a multiple of pad_factor");
    }
    const ForwardModel model(FourierMagnitudeModel{pad, s.real("rho")});
    const std::size_t h = images.front().height() / pad, w = images.front().width() / pad;
    const MeasurementStack stack({images.front()}, NoiseParams(1.0), model.rho());
    RngStream rng = RngStream(s.seed()).substream(kHioStream);
    const HioResult r = hio_initializer(stack, model, hio_config(s), rng);
    const ComplexImage est = crop(r.best, h, w);

    Output out(s);
    out.complex("estimate", "estimate.cvl", {est});
    out.preview_auto("amplitude.png", amplitude(est));
    out.preview("phase.png", phase(est), -std::numbers::pi, std::numbers::pi);

    Json metrics = nullptr;
    if (s.has("truth")) {
        const ComplexImage truth = truth_complex(s);
        const Alignment a = align_ambiguities(est, truth);
        metrics = complex_metrics(a.aligned, truth);
        metrics["correlation"] = a.correlation;
    }
    Json diag = {{"hio_residual", r.residual}, {"best_restart", r.best_restart}};
    return manifest_sections(out, std::move(metrics), std::move(diag));
}

Json cmd_metrics(const Settings& s, std::ostream& os, std::ostream&) {
    const io::ArrayStack est = load_any(s.str("est"));
    const io::ArrayStack truth = load_any(s.str("truth"));
    const std::size_t k = s.count("index");
    if (k >= est.count() || k >= truth.count()) throw DimensionError("index beyond the stack depth");
    const double peak = s.real("peak");
    Json m;
    if (est.dtype == io::DType::f32_complex || truth.dtype == io::DType::f32_complex) {
        auto pick = [k](const io::ArrayStack& a) {
            return a.dtype == io::DType::f32_complex ? a.complex[k] : to_complex(a.real[k]);
        };
        const ComplexImage e = pick(est), t = pick(truth);
        require_same_shape(e, t, "metrics");
        m = complex_metrics(e, t, peak);
    } else {
        m = real_metrics(est.real[k], truth.real[k], peak);
    }
    os << m.dump() << "\n";
    return nullptr;
}

Json cmd_protocol_check(const Settings& s, std::ostream& os, std::ostream&) {
    auto client = protocol::ScoreClient::open(s.str("endpoint"));
    const auto h = static_cast<std::uint32_t>(s.count("height"));
    const auto w = static_cast<std::uint32_t>(s.count("width"));
    if (h == 0 || w == 0) throw ConfigError("height and width must be positive");
    const double sigma = s.real("sigma");
    Json report = Json::object();
    report["endpoint"] = s.str("endpoint");
    for (bool complex : {false, true}) {
        const std::size_t n = static_cast<std::size_t>(h) * w * (complex ? 2 : 1);
        std::vector<float> probe(n);
        for (std::size_t i = 0; i < n; ++i) probe[i] = 0.25f + 0.5f * static_cast<float>(i) / static_cast<float>(n);
        const auto reply = client->request(h, w, sigma, complex, probe);
        if (reply.size() != n) {
            throw TransportError("response carries " + std::to_string(reply.size()) + " values, expected " +
                                 std::to_string(n));
        }
        const bool finite = std::all_of(reply.begin(), reply.end(), [](float v) { return std::isfinite(v); });
        report[complex ? "complex" : "real"] = {{"values", reply.size()},
                                                {"payload_bytes", reply.size() * sizeof(float)},
                                                {"finite", finite}};
    }
    report["ok"] = true;
    os << report.dump() << "\n";
    return nullptr;
}

std::vector<Command> build_commands() {
    std::vector<Command> c;
    c.push_back({"simulate",
                 "simulate noisy measurements of a clean image or complex object",
                 join({common_keys(),
                       {{"input", "", "clean image (PNG or array container)", KeyKind::path, true},
                        {"model", "identity", "identity | fourier | ptychography"},
                        {"pad_factor", "2", "Fourier oversampling factor"},
                        {"rho", "1", "irradiance scale"},
                        {"leds", "89", "number of LEDs"},
                        {"led_spacing", "2", "LED grid spacing in frequency pixels"},
                        {"pupil_radius", "8", "pupil radius in frequency pixels"},
                        {"pupils", "", "pupil masks (array container) instead of the LED grid", KeyKind::path},
                        {"quant_bits", "8", "quantization depth; 0 disables"}},
                       noise_keys()}),
                 {"input"},
                 true,
                 cmd_simulate});
    c.push_back({"denoise", "posterior sampling for Poisson denoising",
                 join({common_keys(), noise_keys(), sampler_keys("measurement")}), {"measurements"}, true,
                 cmd_denoise});
    c.push_back({"phase-retrieval", "posterior sampling from an oversampled Fourier intensity",
                 join({common_keys(), noise_keys(), sampler_keys("hio"),
                       {{"pad_factor", "2", "Fourier oversampling factor"}, {"rho", "1", "irradiance scale"}},
                       hio_keys()}),
                 {"measurements"}, true, cmd_phase_retrieval});
    c.push_back({"ptychography", "posterior sampling for Fourier ptychography",
                 join({common_keys(), noise_keys(), sampler_keys("measurement"),
                       {{"rho", "1", "irradiance scale"},
                        {"leds", "89", "number of LEDs"},
                        {"led_spacing", "2", "LED grid spacing in frequency pixels"},
                        {"pupil_radius", "8", "pupil radius in frequency pixels"},
                        {"pupils", "", "pupil masks (array container) instead of the LED grid", KeyKind::path}}}),
                 {"measurements"}, true, cmd_ptychography});
    c.push_back({"hio", "hybrid input-output phase retrieval",
                 join({common_keys(),
                       {{"measurements", "", "Fourier intensity (array container)", KeyKind::path, true},
                        {"truth", "", "ground truth for metrics", KeyKind::path},
                        {"pad_factor", "2", "Fourier oversampling factor"},
                        {"rho", "1", "irradiance scale"}},
                       hio_keys()}),
                 {"measurements"}, true, cmd_hio});
    c.push_back({"metrics", "compare an estimate against ground truth and print JSON",
                 {{"est", "", "estimate (PNG or array container)", KeyKind::path, true},
                  {"truth", "", "ground truth (PNG or array container)", KeyKind::path, true},
                  {"index", "0", "stack index to compare"},
                  {"peak", "1", "PSNR peak value"}},
                 {"est", "truth"}, false, cmd_metrics});
    c.push_back({"protocol-check", "handshake with a score server",
                 {{"endpoint", "", "server command or host:port", KeyKind::value, true},
                  {"sigma", "0.1", "noise level sent with the probe"},
                  {"height", "4", "probe height"},
                  {"width", "4", "probe width"}},
                 {"endpoint"}, false, cmd_protocol_check});
    return c;
}

}  // namespace

const std::vector<Command>& commands() {
    static const std::vector<Command> all = build_commands();
    return all;
}

const Command* find_command(const std::string& name) {
    for (const auto& c : commands()) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

}  // namespace pls::cli
