"""Walkthrough: the closed-form label-encoder classifier.

Instead of training a softmax head, class y is embedded at the weighted
class-conditional feature mean g(y), and a sample is assigned to the class
whose embedding correlates best with its (whitened, mixed) feature vector.
For a single whitened source this is the nearest-class-mean rule. The
approximated posterior priors * (1 + <f, g(y)>) is also shown.

Run:  python3 demos/03_closed_form_classifier.py
"""

import numpy as np

from mcrmix import (
    FeatureMatrix,
    LabelVector,
    apply_whitener,
    evaluate,
    fit_ensemble,
    mix_features,
    posterior,
    predict,
)

rng = np.random.default_rng(2)

n_classes, dim = 3, 4
class_means = np.array(
    [[3.0, 0.0, 0.0, 0.0], [-3.0, 0.5, 0.0, 0.0], [0.0, -3.0, 0.5, 0.0]]
)
labels = LabelVector(np.repeat(np.arange(n_classes), 8), n_classes)   # 8-shot
shots = FeatureMatrix(class_means[labels.labels] + 0.6 * rng.standard_normal((24, dim)))

model, report = fit_ensemble([shots], labels)
print("Class embeddings g(y) (rows, in the whitened feature space):")
print(np.round(model.embeddings.g, 3))

test_labels = LabelVector(np.repeat(np.arange(n_classes), 200), n_classes)
test = FeatureMatrix(
    class_means[test_labels.labels] + 0.6 * rng.standard_normal((600, dim))
)
accuracy = evaluate(predict(model, [test]), test_labels)
print(f"held-out accuracy on 600 samples: {accuracy:.3f}")

white = apply_whitener(model.whiteners[0], test)
mixed = mix_features([white], model.alpha)
row = mixed.data[0]
print("posterior for one class-0 sample:", np.round(posterior(model, row), 3))
print("(rows are clipped at zero and renormalized; argmax prediction is")
print(" unaffected because it never forms the posterior)")
