"""Frozen backbone construction, tap points, and canonical preprocessing.

A tap point names a post-convolutional fully-connected activation: "fc6"
and "fc7" are the activations after the first and second FC layer's ReLU
(fc7 is what remains when the final classification layer is dropped, and
is the default export).  The export width is introspected from the
tapped Linear module at runtime, never hard-coded.
"""

import torch
from torchvision import models, transforms

# backbone -> tap -> (index of the Linear in .classifier,
#                     classifier prefix length that ends at the tap ReLU)
BACKBONES = {
    "alexnet": {"fc6": (1, 3), "fc7": (4, 6)},
    "vgg16": {"fc6": (0, 2), "fc7": (3, 5)},
}

DEFAULT_TAP = "fc7"

IMAGENET_MEAN = [0.485, 0.456, 0.406]
IMAGENET_STD = [0.229, 0.224, 0.225]

_BUILDERS = {
    "alexnet": (models.alexnet, models.AlexNet_Weights.IMAGENET1K_V1),
    "vgg16": (models.vgg16, models.VGG16_Weights.IMAGENET1K_V1),
}


def preprocessing():
    """Canonical inference transform shared by both supported backbones."""
    return transforms.Compose([
        transforms.Resize(256),
        transforms.CenterCrop(224),
        transforms.ToTensor(),
        transforms.Normalize(mean=IMAGENET_MEAN, std=IMAGENET_STD),
    ])


def preprocessing_description():
    return {"resize": 256, "center_crop": 224,
            "normalize_mean": IMAGENET_MEAN, "normalize_std": IMAGENET_STD}


def build_backbone(name, weights="pretrained", seed=0):
    """Construct the named backbone in eval mode with frozen parameters.

    weights: "pretrained" (downloads the canonical checkpoint),
    "random" (seeded initialization; deterministic for a fixed torch
    version, useful offline and in tests), or "file:PATH" (a local
    state-dict checkpoint).
    """
    if name not in BACKBONES:
        raise ValueError(f"unknown backbone {name!r}; have {sorted(BACKBONES)}")
    builder, pretrained_weights = _BUILDERS[name]
    if weights == "pretrained":
        model = builder(weights=pretrained_weights)
    elif weights == "random":
        torch.manual_seed(seed)
        model = builder(weights=None)
    elif isinstance(weights, str) and weights.startswith("file:"):
        model = builder(weights=None)
        state = torch.load(weights[5:], map_location="cpu", weights_only=True)
        model.load_state_dict(state)
    else:
        raise ValueError(
            f"weights must be 'pretrained', 'random', or 'file:PATH'; "
            f"got {weights!r}")
    model.eval()
    for p in model.parameters():
        p.requires_grad_(False)
    return model


def tap_width(model, name, tap):
    """Output width of the tapped FC layer, read from the loaded model."""
    linear_index, _ = _tap_indices(name, tap)
    return model.classifier[linear_index].out_features


def _tap_indices(name, tap):
    taps = BACKBONES[name]
    if tap not in taps:
        raise ValueError(f"backbone {name!r} has taps {sorted(taps)}, "
                         f"got {tap!r}")
    return taps[tap]


@torch.no_grad()
def extract_batch(model, name, tap, batch):
    """Features for a preprocessed image batch at the tap point."""
    _, prefix = _tap_indices(name, tap)
    x = model.features(batch)
    x = model.avgpool(x)
    x = torch.flatten(x, 1)
    x = model.classifier[:prefix](x)
    return x.cpu().numpy()
