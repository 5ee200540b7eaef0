# Generated by nnport 0.1.0: pt/subclassing -> pt/sequential, pivot sha256 0c6a60776d9620b334e49d1fd39ca786cf6f25e5fc194719156d32c068c57a5b
from collections import OrderedDict

import torch
from torch import nn

INPUT_SHAPE = (32, 32, 3)
METRICS = ()
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


VGG16 = nn.Sequential(OrderedDict([
    ("conv1_to_cf", Permute(0, 3, 1, 2)),
    ("conv1", nn.Conv2d(in_channels=3, out_channels=64, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv1_act", nn.ReLU()),
    ("conv2", nn.Conv2d(in_channels=64, out_channels=64, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv2_act", nn.ReLU()),
    ("pool1", nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))),
    ("conv3", nn.Conv2d(in_channels=64, out_channels=128, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv3_act", nn.ReLU()),
    ("conv4", nn.Conv2d(in_channels=128, out_channels=128, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv4_act", nn.ReLU()),
    ("pool2", nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))),
    ("conv5", nn.Conv2d(in_channels=128, out_channels=256, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv5_act", nn.ReLU()),
    ("conv6", nn.Conv2d(in_channels=256, out_channels=256, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv6_act", nn.ReLU()),
    ("conv7", nn.Conv2d(in_channels=256, out_channels=256, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv7_act", nn.ReLU()),
    ("pool3", nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))),
    ("conv8", nn.Conv2d(in_channels=256, out_channels=512, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv8_act", nn.ReLU()),
    ("conv9", nn.Conv2d(in_channels=512, out_channels=512, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv9_act", nn.ReLU()),
    ("conv10", nn.Conv2d(in_channels=512, out_channels=512, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv10_act", nn.ReLU()),
    ("pool4", nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))),
    ("conv11", nn.Conv2d(in_channels=512, out_channels=512, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv11_act", nn.ReLU()),
    ("conv12", nn.Conv2d(in_channels=512, out_channels=512, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv12_act", nn.ReLU()),
    ("conv13", nn.Conv2d(in_channels=512, out_channels=512, kernel_size=(3, 3), stride=(1, 1), padding="same")),
    ("conv13_act", nn.ReLU()),
    ("pool5", nn.MaxPool2d(kernel_size=(2, 2), stride=(2, 2))),
    ("pool5_to_cl", Permute(0, 2, 3, 1)),
    ("flatten", nn.Flatten()),
    ("drop1", nn.Dropout(p=0.5)),
    ("fc1", nn.Linear(in_features=512, out_features=512)),
    ("fc1_act", nn.ReLU()),
    ("drop2", nn.Dropout(p=0.5)),
    ("fc2", nn.Linear(in_features=512, out_features=512)),
    ("fc2_act", nn.ReLU()),
    ("drop3", nn.Dropout(p=0.5)),
    ("fc3", nn.Linear(in_features=512, out_features=10)),
]))


def make_loader(dataset):
    return torch.utils.data.DataLoader(dataset, batch_size=64, shuffle=True)


def train(model, loader):
    optimizer = torch.optim.SGD(model.parameters(), lr=0.01)
    criterion = nn.CrossEntropyLoss()
    for epoch in range(10):
        model.train()
        for x, y in loader:
            optimizer.zero_grad()
            loss = criterion(model(x), y)
            loss.backward()
            optimizer.step()
    return model
