"""Network layers with explicit-cache forward/backward passes.

``forward`` returns ``(y, cache)`` and never stores activations on the layer,
so the same layer instance can run several passes per step (the decoder is
evaluated once per latent stream) before the matching ``backward`` calls.
Parameter gradients accumulate into ``Param.grad``.
"""

import numpy as np

from .. import kernels


class Param:
    __slots__ = ("name", "value", "grad")

    def __init__(self, name, value):
        self.name = name
        self.value = value
        self.grad = np.zeros_like(value)

    def zero_grad(self):
        self.grad.fill(0.0)


class Layer:
    def params(self):
        return []

    def buffers(self):
        """Non-trained state (running statistics), as (name, array) pairs."""
        return []

    def forward(self, x, training):
        raise NotImplementedError

    def backward(self, cache, dy):
        raise NotImplementedError


class Conv(Layer):
    """Strided n-d convolution or its transpose, with bias."""

    def __init__(self, name, in_ch, out_ch, kernel, stride, padding, ndim, transposed, gain, rng, dtype):
        self.stride = stride
        self.padding = padding
        self.ndim = ndim
        self.transposed = transposed
        kshape = (kernel,) * ndim
        wshape = (in_ch, out_ch) + kshape if transposed else (out_ch, in_ch) + kshape
        fan_in = in_ch * kernel**ndim
        std = gain / np.sqrt(fan_in)
        self.weight = Param(f"{name}.weight", rng.normal(0.0, std, size=wshape).astype(dtype))
        self.bias = Param(f"{name}.bias", np.zeros(out_ch, dtype=dtype))

    def params(self):
        return [self.weight, self.bias]

    def _bias_view(self):
        return self.bias.value.reshape((1, -1) + (1,) * self.ndim)

    def forward(self, x, training):
        if self.transposed:
            y = kernels.convt_forward(x, self.weight.value, self.stride, self.padding)
        else:
            y = kernels.conv_forward(x, self.weight.value, self.stride, self.padding)
        y += self._bias_view()
        return y, x

    def backward(self, cache, dy):
        x = cache
        axes = (0,) + tuple(range(2, 2 + self.ndim))
        self.bias.grad += dy.sum(axis=axes)
        kshape = self.weight.value.shape[2:]
        if self.transposed:
            self.weight.grad += kernels.convt_backward_weight(x, dy, kshape, self.stride, self.padding)
            return kernels.convt_backward_input(self.weight.value, dy, self.stride, self.padding)
        self.weight.grad += kernels.conv_backward_weight(x, dy, kshape, self.stride, self.padding)
        return kernels.conv_backward_input(self.weight.value, dy, x.shape[2:], self.stride, self.padding)


class BatchNorm(Layer):
    """Per-channel batch normalization (biased batch variance, torch-style)."""

    def __init__(self, name, channels, rng=None, dtype=np.float64, momentum=0.1, eps=1e-5):
        self.momentum = momentum
        self.eps = eps
        self.gamma = Param(f"{name}.gamma", np.ones(channels, dtype=dtype))
        self.beta = Param(f"{name}.beta", np.zeros(channels, dtype=dtype))
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)
        self._name = name

    def params(self):
        return [self.gamma, self.beta]

    def buffers(self):
        return [(f"{self._name}.running_mean", self.running_mean), (f"{self._name}.running_var", self.running_var)]

    def _shape(self, x):
        return (1, -1) + (1,) * (x.ndim - 2)

    def forward(self, x, training):
        axes = (0,) + tuple(range(2, x.ndim))
        shape = self._shape(x)
        if training:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            n = x.size // x.shape[1]
            unbiased = var * (n / (n - 1)) if n > 1 else var
            self.running_mean += self.momentum * (mean - self.running_mean)
            self.running_var += self.momentum * (unbiased - self.running_var)
        else:
            mean = self.running_mean
            var = self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean.reshape(shape)) * inv_std.reshape(shape)
        y = self.gamma.value.reshape(shape) * xhat + self.beta.value.reshape(shape)
        return y, (xhat, inv_std, training)

    def backward(self, cache, dy):
        xhat, inv_std, training = cache
        axes = (0,) + tuple(range(2, dy.ndim))
        shape = self._shape(dy)
        self.gamma.grad += (dy * xhat).sum(axis=axes)
        self.beta.grad += dy.sum(axis=axes)
        dxhat = dy * self.gamma.value.reshape(shape)
        if not training:
            return dxhat * inv_std.reshape(shape)
        n = dy.size // dy.shape[1]
        s1 = dxhat.sum(axis=axes).reshape(shape)
        s2 = (dxhat * xhat).sum(axis=axes).reshape(shape)
        return inv_std.reshape(shape) / n * (n * dxhat - s1 - xhat * s2)


class ReLU(Layer):
    def forward(self, x, training):
        mask = x > 0
        return x * mask, mask

    def backward(self, cache, dy):
        return dy * cache


class Sigmoid(Layer):
    def forward(self, x, training):
        y = 1.0 / (1.0 + np.exp(-x))
        return y, y

    def backward(self, cache, dy):
        y = cache
        return dy * y * (1.0 - y)


class Dense(Layer):
    """Fully-connected layer on (N, features) inputs.

    The forward pass multiplies sample by sample: a batched GEMM may change
    its reduction order with the batch size, which would break the exact
    batch-invariance of per-example outputs.
    """

    def __init__(self, name, in_features, out_features, gain, rng, dtype):
        std = gain / np.sqrt(in_features)
        self.weight = Param(f"{name}.weight", rng.normal(0.0, std, size=(out_features, in_features)).astype(dtype))
        self.bias = Param(f"{name}.bias", np.zeros(out_features, dtype=dtype))

    def params(self):
        return [self.weight, self.bias]

    def forward(self, x, training):
        y = np.empty((x.shape[0], self.bias.value.shape[0]), dtype=x.dtype)
        for i in range(x.shape[0]):
            y[i] = self.weight.value @ x[i] + self.bias.value
        return y, x

    def backward(self, cache, dy):
        x = cache
        self.weight.grad += dy.T @ x
        self.bias.grad += dy.sum(axis=0)
        return dy @ self.weight.value
