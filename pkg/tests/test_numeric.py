import numpy as np
import pytest

from errors import GradCheckError, ShapeError, VocabularyError
from numeric import ops
from numeric.gradcheck import grad_check
from numeric.optim import Adam, AdamState, adam_step
from numeric.tensor import Parameter, Tensor, get_dtype, no_grad, set_precision


def test_matmul_add_gradients(double_precision):
    a = Parameter(np.array([[1.0, 2.0], [3.0, 4.0]]), name="a")
    b = Parameter(np.array([[0.5], [-1.0]]), name="b")
    bias = Parameter(np.array([0.25]), name="bias")
    out = ops.add(ops.matmul(a, b), bias)
    out.backward(np.ones((2, 1)))
    assert np.allclose(a.grad, [[0.5, -1.0], [0.5, -1.0]])
    assert np.allclose(b.grad, [[4.0], [6.0]])
    assert np.allclose(bias.grad, [2.0])


def test_multiply_and_shared_input(double_precision):
    x = Parameter(np.array([3.0]), name="x")
    y = ops.multiply(x, x)
    z = ops.multiply(y, y)
    z.backward()
    assert np.allclose(x.grad, [4 * 3.0 ** 3])


def test_sigmoid_tanh_gradients(double_precision):
    x = Parameter(np.array([-2.0, 0.0, 3.0]), name="x")
    ops.sigmoid(x).backward(np.ones(3))
    s = 1.0 / (1.0 + np.exp(-x.data))
    assert np.allclose(x.grad, s * (1 - s))

    x.zero_grad()
    ops.tanh(x).backward(np.ones(3))
    assert np.allclose(x.grad, 1 - np.tanh(x.data) ** 2)


def test_stable_sigmoid_extremes():
    out = ops.stable_sigmoid(np.array([-1000.0, 0.0, 1000.0]))
    assert np.all(np.isfinite(out))
    assert out.tolist() == [0.0, 0.5, 1.0]


def test_shape_errors():
    with pytest.raises(ShapeError):
        ops.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))
    with pytest.raises(ShapeError):
        ops.add(Tensor(np.zeros((2, 3))), Tensor(np.zeros((4,))))


def test_frozen_parameter_collects_no_gradient():
    w = Parameter(np.ones((2, 1)), name="w")
    w.freeze()
    x = Parameter(np.ones((1, 2)), name="x")
    ops.matmul(x, w).backward()
    assert w.grad is None
    assert x.grad is not None


def test_no_grad_records_nothing():
    w = Parameter(np.ones((2, 1)), name="w")
    with no_grad():
        out = ops.matmul(Tensor(np.ones((1, 2))), w)
    assert not out.requires_grad
    out.backward()
    assert w.grad is None


def test_adam_first_step_moves_by_learning_rate():
    p = Parameter(np.array([1.0, -2.0]), name="p")
    p.grad = np.array([0.3, -5.0], dtype=p.data.dtype)
    state = AdamState(learning_rate=1e-3)
    adam_step([p], state)
    # the bias-corrected first step is lr * sign(grad) up to epsilon
    assert np.allclose(p.data, [1.0 - 1e-3, -2.0 + 1e-3], atol=1e-6)
    assert state.step == 1


def test_adam_skips_frozen_parameters():
    frozen = Parameter(np.array([1.0]), name="frozen", trainable=False)
    frozen.grad = np.array([1.0], dtype=frozen.data.dtype)
    live = Parameter(np.array([1.0]), name="live")
    live.grad = np.array([1.0], dtype=live.data.dtype)
    optimizer = Adam([frozen, live])
    optimizer.step()
    assert frozen.data.tolist() == [1.0]
    assert "frozen" not in optimizer.state.first_moment
    assert live.data[0] < 1.0


def test_adam_minimizes_quadratic(double_precision):
    x = Parameter(np.array([5.0, -3.0]), name="x")
    optimizer = Adam([x], learning_rate=0.1)
    for _ in range(500):
        optimizer.zero_grad()
        ops.multiply(x, x).backward(np.ones(2))
        optimizer.step()
    assert np.all(np.abs(x.data) < 5e-2)


def test_embed_lookup_sums_action_and_delta_columns():
    matrix = Parameter(np.arange(12, dtype=np.float64).reshape(2, 6), name="emb")
    # 4 action tokens, 2 delta tokens
    actions = np.array([[ops.PAD, 1, 3]])
    deltas = np.array([[ops.PAD, 0, 1]])
    out = ops.embed_lookup(matrix, actions, deltas, num_actions=4)
    assert out.data[0, 0].tolist() == [0.0, 0.0]
    assert out.data[0, 1].tolist() == [1.0 + 4.0, 7.0 + 10.0]
    assert out.data[0, 2].tolist() == [3.0 + 5.0, 9.0 + 11.0]

    out.backward(np.ones_like(out.data))
    assert matrix.grad[:, 0].tolist() == [0.0, 0.0]
    assert matrix.grad[:, 1].tolist() == [1.0, 1.0]


def test_embed_lookup_repeated_tokens_accumulate():
    matrix = Parameter(np.zeros((1, 3)), name="emb")
    out = ops.embed_lookup(matrix, np.array([[0, 0, 0]]), np.array([[0, 0, 0]]), num_actions=2)
    out.backward(np.ones_like(out.data))
    assert matrix.grad.tolist() == [[3.0, 0.0, 3.0]]


def test_embed_lookup_rejects_unknown_tokens():
    matrix = Parameter(np.zeros((2, 5)), name="emb")
    with pytest.raises(VocabularyError):
        ops.embed_lookup(matrix, np.array([[4]]), np.array([[0]]), num_actions=3)
    with pytest.raises(VocabularyError):
        ops.embed_lookup(matrix, np.array([[0]]), np.array([[2]]), num_actions=3)


def test_max_over_time_and_mask():
    x = Parameter(np.array([[[5.0, 0.0], [1.0, 2.0], [3.0, 2.0]]]), name="x")
    pooled, argmax = ops.max_over_time(x)
    assert pooled.data.tolist() == [[5.0, 2.0]]
    # ties go to the earliest step
    assert argmax.tolist() == [[0, 1]]

    masked, _ = ops.max_over_time(x, np.array([[False, True, True]]))
    assert masked.data.tolist() == [[3.0, 2.0]]

    pooled.backward(np.ones((1, 2)))
    assert x.grad.tolist() == [[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]]


def test_bce_with_logits_value_and_gradient(double_precision):
    z = Parameter(np.array([[0.0], [2.0]]), name="z")
    loss = ops.bce_with_logits(z, np.array([1, 0]))
    expected = (np.log(2.0) + np.log1p(np.exp(2.0))) / 2
    assert loss.data == pytest.approx(expected)
    loss.backward()
    assert np.allclose(z.grad.reshape(-1), [(0.5 - 1) / 2, (1 / (1 + np.exp(-2.0))) / 2])


def test_bce_loss_of_probabilities():
    assert ops.bce_loss([0.5, 0.5], [1, 0]) == pytest.approx(np.log(2.0))


def test_lstm_cell_gradients_match_finite_differences(double_precision):
    rng = np.random.default_rng(3)
    W = Parameter(rng.normal(scale=0.5, size=(3, 8)), name="W")
    U = Parameter(rng.normal(scale=0.5, size=(2, 8)), name="U")
    b = Parameter(rng.normal(scale=0.5, size=8), name="b")
    x = rng.normal(size=(4, 3))

    def loss():
        h, c = Tensor(np.zeros((4, 2))), Tensor(np.zeros((4, 2)))
        for _ in range(3):
            h, c = ops.lstm_cell(Tensor(x), h, c, (W, U, b))
        return ops.bce_with_logits(ops.matmul(h, Tensor(np.ones((2, 1)))), np.array([1, 0, 1, 0]))

    report = grad_check(loss, [W, U, b])
    assert report.max_relative_error < 1e-4


def test_grad_check_requires_double():
    set_precision("single")
    p = Parameter(np.ones(2), name="p")
    with pytest.raises(GradCheckError):
        grad_check(lambda: ops.multiply(p, p), [p])


def test_grad_check_detects_wrong_gradient(double_precision):
    p = Parameter(np.array([[1.0, 2.0]]), name="p")

    def loss():
        return ops.bce_with_logits(ops.matmul(_bad_square(p), Tensor(np.ones((2, 1)))), np.array([1]))

    with pytest.raises(GradCheckError) as info:
        grad_check(loss, [p])
    assert info.value.offending == ["p"]


def _bad_square(p):
    out = ops.multiply(p, p)
    if out.requires_grad:
        # drops the factor 2p
        out._backward = lambda grad: p.accumulate(grad)
    return out


def test_precision_switch():
    set_precision("double")
    assert get_dtype() is np.float64
    assert Parameter([1.0], name="p").data.dtype == np.float64
    set_precision("single")
    assert get_dtype() is np.float32
    with pytest.raises(ValueError):
        set_precision("half")


def test_deep_graph_backward():
    x = Parameter(np.array([[0.5]]), name="x")
    h = x
    for _ in range(5000):
        h = ops.tanh(h)
    h.backward(np.ones((1, 1)))
    assert x.grad is not None
