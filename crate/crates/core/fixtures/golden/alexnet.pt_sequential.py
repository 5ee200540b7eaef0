# Generated by nnport 0.1.0: pt/subclassing -> pt/sequential, pivot sha256 2cb77cacedfa626f568132aa40a7230abb40182bb8f3a8217cb3d99f4c0f4ba9
from collections import OrderedDict

import torch
from torch import nn

INPUT_SHAPE = (32, 32, 3)
METRICS = ("accuracy",)
DATASETS = {
    "cifar10": ("data/cifar10", "classification", "images"),
    "svhn": ("data/svhn", "classification", "images"),
}


class Permute(nn.Module):
    def __init__(self, *dims):
        super().__init__()
        self.dims = dims

    def forward(self, x):
        return x.permute(*self.dims)


AlexNet = nn.Sequential(OrderedDict([
    ("conv1_to_cf", Permute(0, 3, 1, 2)),
    ("conv1", nn.Conv2d(in_channels=3, out_channels=64, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv1_act", nn.ReLU()),
    ("pool1", nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))),
    ("conv2", nn.Conv2d(in_channels=64, out_channels=192, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv2_act", nn.ReLU()),
    ("pool2", nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))),
    ("conv3", nn.Conv2d(in_channels=192, out_channels=384, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv3_act", nn.ReLU()),
    ("conv4", nn.Conv2d(in_channels=384, out_channels=256, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv4_act", nn.ReLU()),
    ("conv5", nn.Conv2d(in_channels=256, out_channels=256, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv5_act", nn.ReLU()),
    ("pool3", nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))),
    ("pool3_to_cl", Permute(0, 2, 3, 1)),
    ("flatten", nn.Flatten()),
    ("drop1", nn.Dropout(p=0.5)),
    ("fc1", nn.Linear(in_features=4096, out_features=1024)),
    ("fc1_act", nn.ReLU()),
    ("drop2", nn.Dropout(p=0.5)),
    ("fc2", nn.Linear(in_features=1024, out_features=512)),
    ("fc2_act", nn.ReLU()),
    ("drop3", nn.Dropout(p=0.5)),
    ("fc3", nn.Linear(in_features=512, out_features=10)),
]))


def make_loader(dataset):
    return torch.utils.data.DataLoader(dataset, batch_size=32, shuffle=True)


def train(model, loader):
    optimizer = torch.optim.Adam(model.parameters(), lr=0.001)
    criterion = nn.CrossEntropyLoss()
    for epoch in range(10):
        model.train()
        for x, y in loader:
            optimizer.zero_grad()
            loss = criterion(model(x), y)
            loss.backward()
            optimizer.step()
    return model
