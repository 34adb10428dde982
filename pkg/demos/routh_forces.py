# Which forces keep a symplectic structure?
#
# A Routh force has a closed two-form beta such that the forced plus form,
# corrected by beta, is preserved by the flow. Friction has no such form.

import numpy as np

from routhe import forms, systems

for s in (systems.synthetic_routh(0.3), systems.dissipative(0.5)):
    cert = forms.detect_routh(s)
    print(f"{s.name}: routh={cert.is_routh}  violations={cert.violations}")
    if cert.is_routh:
        print("  beta =\n", cert.beta(np.zeros(2)))
        res = forms.check_preservation(s, "omega_plus_corrected", [0.3, -0.2], [0.35, -0.1], 50, cert)
    else:
        res = forms.check_preservation(s, "omega_f_plus", [0.3, -0.2], [0.35, -0.1], 50)
        print(f"  change explained by the force term up to {res.mismatch:.1e}")
    print(f"  preservation defect over 50 steps: {res.defect:.2e}")
