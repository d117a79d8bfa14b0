#include "qsr/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "qsr/parallel.hpp"

namespace qsr {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Portable uniform draws (std distributions differ between standard libraries).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    double uniform() { return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
        return lo + static_cast<std::size_t>(uniform() * static_cast<double>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

/// A parameter value together with its admissible range, so it can be jittered.
struct Param {
    double value, lo, hi;
};

struct Blob {
    Param cx0, cy0, cx1, cy1;  // offsets from the head centre, fraction of head radius
    Param rx0, ry0, rx1, ry1;  // fraction of image size
    Param angle0, angle1;
    Param intensity;
};

struct Patient {
    Param hx, hy;            // head centre
    Param ax0, ay0, ax1, ay1;  // head semi-axes at first and last slice
    Param skull, tissue;
    std::vector<Blob> blobs;

    template <class F>
    void for_each(F&& f) {
        for (Param* p : {&hx, &hy, &ax0, &ay0, &ax1, &ay1, &skull, &tissue}) f(*p);
        for (auto& b : blobs)
            for (Param* p : {&b.cx0, &b.cy0, &b.cx1, &b.cy1, &b.rx0, &b.ry0, &b.rx1, &b.ry1,
                             &b.angle0, &b.angle1, &b.intensity})
                f(*p);
    }
};

Param draw(Rng& rng, double lo, double hi) { return {rng.uniform(lo, hi), lo, hi}; }

Patient draw_patient(const PhantomSpec& spec, Rng& rng) {
    Patient p;
    p.hx = draw(rng, 0.47, 0.53);
    p.hy = draw(rng, 0.47, 0.53);
    p.ax0 = draw(rng, 0.32, 0.38);
    p.ay0 = draw(rng, 0.40, 0.45);
    p.ax1 = draw(rng, 0.26, 0.34);
    p.ay1 = draw(rng, 0.33, 0.41);
    p.skull = draw(rng, 0.6, 0.85);
    p.tissue = draw(rng, 0.12, 0.3);
    const std::size_t n = rng.index(spec.min_blobs, spec.max_blobs);
    for (std::size_t i = 0; i < n; ++i) {
        Blob b;
        b.cx0 = draw(rng, -0.6, 0.6);
        b.cy0 = draw(rng, -0.6, 0.6);
        b.cx1 = draw(rng, -0.6, 0.6);
        b.cy1 = draw(rng, -0.6, 0.6);
        b.rx0 = draw(rng, spec.min_radius, spec.max_radius);
        b.ry0 = draw(rng, spec.min_radius, spec.max_radius);
        b.rx1 = draw(rng, spec.min_radius, spec.max_radius);
        b.ry1 = draw(rng, spec.min_radius, spec.max_radius);
        b.angle0 = draw(rng, 0.0, std::numbers::pi);
        b.angle1 = draw(rng, 0.0, std::numbers::pi);
        // roughly one blob in four is a cold region
        const double mag = rng.uniform(spec.min_intensity, spec.max_intensity);
        const bool cold = rng.uniform() < 0.25;
        b.intensity = cold ? Param{-0.5 * mag, -0.5 * spec.max_intensity, 0.0}
                           : Param{mag, spec.min_intensity, spec.max_intensity};
        p.blobs.push_back(b);
    }
    return p;
}

double lerp(const Param& a, const Param& b, double t) { return a.value + (b.value - a.value) * t; }

Image2D render(const Patient& p, std::size_t size, double t) {
    const double n = static_cast<double>(size);
    const double ax = lerp(p.ax0, p.ax1, t), ay = lerp(p.ay0, p.ay1, t);
    const double thickness = 0.025 / std::min(ax, ay);  // in units of normalised radius

    struct Placed {
        double cx, cy, rx, ry, cs, sn, intensity;
    };
    std::vector<Placed> placed;
    for (const auto& b : p.blobs) {
        const double ang = lerp(b.angle0, b.angle1, t);
        placed.push_back({p.hx.value + lerp(b.cx0, b.cx1, t) * ax,
                          p.hy.value + lerp(b.cy0, b.cy1, t) * ay, lerp(b.rx0, b.rx1, t),
                          lerp(b.ry0, b.ry1, t), std::cos(ang), std::sin(ang), b.intensity.value});
    }

    Image2D img(size, size);
    for (std::size_t r = 0; r < size; ++r) {
        const double v = (static_cast<double>(r) + 0.5) / n;
        for (std::size_t c = 0; c < size; ++c) {
            const double u = (static_cast<double>(c) + 0.5) / n;
            const double du = (u - p.hx.value) / ax, dv = (v - p.hy.value) / ay;
            const double e = std::sqrt(du * du + dv * dv);
            const double inside = 1.0 / (1.0 + std::exp((e - 1.0 + thickness) / 0.01));
            const double ring = std::exp(-std::pow((e - 1.0) / thickness, 2.0));
            double val = p.tissue.value * inside + p.skull.value * ring;
            for (const auto& b : placed) {
                const double x = u - b.cx, y = v - b.cy;
                const double xr = b.cs * x + b.sn * y, yr = -b.sn * x + b.cs * y;
                val += inside * b.intensity *
                       std::exp(-0.5 * (xr * xr / (b.rx * b.rx) + yr * yr / (b.ry * b.ry)));
            }
            img(r, c) = static_cast<float>(std::clamp(val, 0.0, 1.0));
        }
    }
    return img;
}

std::string patient_id(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "p%03zu", i);
    return buf;
}

std::vector<Patient> draw_patients(const PhantomSpec& spec) {
    std::vector<Patient> out;
    for (std::size_t i = 0; i < spec.patients; ++i) {
        std::uint64_t s = spec.seed ^ (0x5851f42d4c957f2dull * (i + 1));
        Rng rng(splitmix64(s));
        out.push_back(draw_patient(spec, rng));
    }
    return out;
}

Dataset render_all(const PhantomSpec& spec, const std::vector<Patient>& patients, DatasetLabel label) {
    const std::size_t slices = spec.slices_per_patient;
    std::vector<Volume> vols(patients.size());
    for (std::size_t i = 0; i < patients.size(); ++i) {
        vols[i].patient_id = patient_id(i);
        vols[i].slices.resize(slices);
    }
    parallel_for(patients.size() * slices, [&](std::size_t k) {
        const std::size_t i = k / slices, s = k % slices;
        const double t = slices > 1 ? static_cast<double>(s) / static_cast<double>(slices - 1) : 0.0;
        vols[i].slices[s] = render(patients[i], spec.size, t);
    });
    return Dataset(label, std::move(vols));
}

}  // namespace

void PhantomSpec::validate() const {
    if (patients < 1) throw Error("phantom: patients must be >= 1");
    if (slices_per_patient < 1) throw Error("phantom: slices per patient must be >= 1");
    if (size < 32) throw Error("phantom: size must be >= 32");
    if (min_blobs > max_blobs) throw Error("phantom: min_blobs exceeds max_blobs");
    if (!(min_radius > 0) || min_radius > max_radius) throw Error("phantom: invalid radius range");
    if (!(min_intensity >= 0) || min_intensity > max_intensity || max_intensity > 1)
        throw Error("phantom: invalid intensity range");
}

Dataset generate_dataset(const PhantomSpec& spec, DatasetLabel label) {
    spec.validate();
    return render_all(spec, draw_patients(spec), label);
}

std::pair<Dataset, Dataset> generate_similar_pair(const PhantomSpec& spec, double perturbation) {
    spec.validate();
    if (!(perturbation >= 0.0 && perturbation <= 1.0))
        throw Error("phantom: perturbation must lie in [0,1]");
    const auto base = draw_patients(spec);
    auto jittered = base;
    std::uint64_t s = spec.seed ^ 0xa0761d6478bd642full;
    Rng rng(splitmix64(s));
    for (auto& p : jittered)
        p.for_each([&](Param& q) {
            const double u = rng.uniform(-1.0, 1.0);
            q.value = std::clamp(q.value + perturbation * (q.hi - q.lo) * u, q.lo, q.hi);
        });
    return {render_all(spec, base, DatasetLabel::LR), render_all(spec, jittered, DatasetLabel::HR)};
}

}  // namespace qsr
