// Completes a synthetic month of 30-minute readings for 50 users with 30% of
// the entries hidden, and compares CPD-LRTC against HaLRTC.

#include <lrtc/lrtc.hpp>

#include <iostream>

int main() {
    using namespace lrtc;

    const SynthSpec spec{{31, 48, 50}, 3, 0.05, true};
    const SynthResult synth    = synth_load_tensor(spec, 42);
    const TensorDataset masked = simulate_missing(synth.dataset, 0.3, 7);

    SolverConfig cpd;
    cpd.rank = 5;
    const CompletionReport a = complete(masked.tensor, masked.mask, cpd);
    const CompletionReport b = complete_halrtc(masked.tensor, masked.mask, HalrtcConfig{});

    std::cout << "cpd_lrtc: RSE " << rse(a.completed, synth.dataset.tensor, masked.mask)
              << "% in " << a.iterations << " iterations, " << a.wall_time << " s\n"
              << "halrtc:   RSE " << rse(b.completed, synth.dataset.tensor, masked.mask)
              << "% in " << b.iterations << " iterations, " << b.wall_time << " s\n";
}
