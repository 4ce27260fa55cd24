import numpy as np
import pytest

import boundaryscope as bs

REFERENCE_SEED = 7
REFERENCE_EPOCHS = 200


def reference_config(train_ds, preset="sgd-anneal", epochs=REFERENCE_EPOCHS):
    net = bs.NetConfig(
        input_dim=16,
        hidden_widths=(32, 32),
        num_classes=4,
        variant="plain",
        seed=REFERENCE_SEED,
    )
    return bs.TrainConfig(
        dataset=train_ds,
        net=net,
        optimizer="sgd",
        schedule=bs.preset_schedule(preset, epochs),
        epochs=epochs,
        batch_size=128,
        seed=REFERENCE_SEED,
        optimizer_kwargs={"momentum": 0.9, "weight_decay": 5e-4},
    )


@pytest.fixture(scope="session")
def reference_data():
    full = bs.gaussian_mixture(bs.reference_spec(), REFERENCE_SEED)
    return bs.train_test_split(full)


@pytest.fixture(scope="session")
def reference_run(reference_data):
    """The canonical annealed run; train once, share across modules."""
    train_ds, _ = reference_data
    archive = bs.train(reference_config(train_ds))
    assert not archive.diverged
    return archive


@pytest.fixture(scope="session")
def small_lr_run(reference_data):
    train_ds, _ = reference_data
    return bs.train(reference_config(train_ds, preset="sgd-small"))


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
