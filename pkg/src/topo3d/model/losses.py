"""Loss terms of the joint objective and their gradients.

Conventions (batch axis first everywhere):

  reconstruction  binary cross entropy averaged over every element, i.e. the
                  per-example mean over the N = D^3 voxels, averaged over the
                  batch; predictions are clamped to [eps, 1-eps]
  distribution    closed-form KL of the diagonal-Gaussian posterior against
                  the standard normal prior, summed over latent dimensions
                  and averaged over the batch
  mask            cross entropy summed (not averaged) over the silhouette
                  pixels, averaged over the batch
  combined        alpha-weighted sum of the four scalars

Gradients are zero where the clamp saturates, matching what central finite
differences measure on the clamped objective.
"""

import numpy as np

CLAMP_EPS = 1e-7

REFERENCE_ALPHAS = (50.0, 0.1, 50.0, 0.0001)


def _clamp(pred):
    clipped = np.clip(pred, CLAMP_EPS, 1.0 - CLAMP_EPS)
    active = (pred > CLAMP_EPS) & (pred < 1.0 - CLAMP_EPS)
    return clipped, active


def _bce_elementwise(target, pred):
    clipped, active = _clamp(pred)
    loss = -(target * np.log(clipped) + (1.0 - target) * np.log1p(-clipped))
    dpred = (-target / clipped + (1.0 - target) / (1.0 - clipped)) * active
    return loss, dpred


def bce_loss(target, pred) -> float:
    """Mean binary cross entropy between a binary array and probabilities."""
    if target.shape != pred.shape:
        raise ValueError(f"shape mismatch: {target.shape} vs {pred.shape}")
    loss, _ = _bce_elementwise(np.asarray(target, dtype=np.float64), np.asarray(pred, dtype=np.float64))
    return float(loss.mean())


def bce_loss_grad(target, pred):
    target = np.asarray(target, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    loss, dpred = _bce_elementwise(target, pred)
    return float(loss.mean()), dpred / pred.size


def kl_loss(mu, log_var) -> float:
    """KL(N(mu, exp(log_var)) || N(0, 1)), summed over dims, batch-averaged."""
    mu = np.atleast_2d(np.asarray(mu, dtype=np.float64))
    log_var = np.atleast_2d(np.asarray(log_var, dtype=np.float64))
    per_example = -0.5 * (1.0 + log_var - mu**2 - np.exp(log_var)).sum(axis=1)
    return float(per_example.mean())


def kl_loss_grad(mu, log_var):
    mu2 = np.atleast_2d(np.asarray(mu, dtype=np.float64))
    lv2 = np.atleast_2d(np.asarray(log_var, dtype=np.float64))
    n = mu2.shape[0]
    loss = kl_loss(mu2, lv2)
    dmu = mu2 / n
    dlog_var = -0.5 * (1.0 - np.exp(lv2)) / n
    return loss, dmu.reshape(np.shape(mu)), dlog_var.reshape(np.shape(log_var))


def mask_loss(mask, mask_pred) -> float:
    """Pixel-summed cross entropy between silhouettes, batch-averaged.

    Unlike the reconstruction term this is not normalized by the pixel count.
    """
    if mask.shape != mask_pred.shape:
        raise ValueError(f"shape mismatch: {mask.shape} vs {mask_pred.shape}")
    mask = np.asarray(mask, dtype=np.float64)
    loss, _ = _bce_elementwise(mask, np.asarray(mask_pred, dtype=np.float64))
    batch = loss.shape[0] if loss.ndim > 2 else 1
    return float(loss.sum()) / batch


def mask_loss_grad(mask, mask_pred):
    mask = np.asarray(mask, dtype=np.float64)
    mask_pred = np.asarray(mask_pred, dtype=np.float64)
    loss, dpred = _bce_elementwise(mask, mask_pred)
    batch = loss.shape[0] if loss.ndim > 2 else 1
    return float(loss.sum()) / batch, dpred / batch


def combined_loss(terms, weights) -> float:
    """Weighted sum alpha_1*rec + alpha_2*kl + alpha_3*obs_rec + alpha_4*mask."""
    terms = tuple(float(t) for t in terms)
    weights = tuple(float(w) for w in weights)
    if len(terms) != 4 or len(weights) != 4:
        raise ValueError("combined_loss takes exactly four terms and four weights")
    if any(w < 0 for w in weights):
        raise ValueError(f"loss weights must be nonnegative, got {weights}")
    return sum(w * t for w, t in zip(weights, terms))
